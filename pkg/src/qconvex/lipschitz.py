"""Upper estimates of L(A) = max_{|c|=1} lambda_max(c.A) and a sampling lower bound.

L(A) is also max_{|x|=1} ||(x*A_i x)_i||, and max over two unit vectors of
||(Re x1*A_i x2)_i||.  The upper estimates, from loosest to cheapest:

    L_P   = sqrt(sum_i ||A_i||^2)
    L_new = lambda_max(sum_i A_i^2)^(1/2)
    L_n   = lambda_max(Tr(A_i A_j))^(1/2)
    L_nov = max_{|c|=1} c.a + sqrt(c^T M c),
            a_i = Tr(A_i)/n,  M_ij = Tr(A_i A_j) - n a_i a_j
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import NumericalFailure
from .model import QuadraticMapSpec
from .search import chart

TOL_PSD = 1e-12


@dataclass
class LipschitzReport:
    L_P: float
    L_new: float
    L_n: float
    L_nov: float
    L_lb: float
    meta: dict = field(default_factory=dict)

    @property
    def best_upper(self) -> float:
        return min(self.L_new, self.L_n, self.L_nov)


def spectral_norms(spec: QuadraticMapSpec) -> np.ndarray:
    w = np.linalg.eigvalsh(spec.A)
    return np.maximum(np.abs(w[:, 0]), np.abs(w[:, -1]))


def l_polyak(spec: QuadraticMapSpec) -> float:
    return float(np.sqrt(np.sum(spectral_norms(spec) ** 2)))


def l_new(spec: QuadraticMapSpec) -> float:
    S = np.einsum("mij,mjk->ik", spec.A, spec.A)
    S = (S + S.conj().T) / 2
    return math.sqrt(max(float(np.linalg.eigvalsh(S)[-1]), 0.0))


def trace_gram(spec: QuadraticMapSpec) -> np.ndarray:
    """T_ij = Re Tr(A_i A_j)."""
    T = np.real(np.einsum("aij,bji->ab", spec.A, spec.A))
    return (T + T.T) / 2


def l_n(spec: QuadraticMapSpec) -> float:
    return math.sqrt(max(float(np.linalg.eigvalsh(trace_gram(spec))[-1]), 0.0))


def nov_ingredients(spec: QuadraticMapSpec) -> tuple[np.ndarray, np.ndarray]:
    """a_i = Tr(A_i)/n and M_ij = Tr(A_i A_j) - n a_i a_j."""
    n = spec.n
    a = np.real(np.einsum("mii->m", spec.A)) / n
    M = trace_gram(spec) - n * np.outer(a, a)
    return a, (M + M.T) / 2


def _nov_objective(c: np.ndarray, a: np.ndarray, M: np.ndarray) -> float:
    return float(c @ a + math.sqrt(max(float(c @ M @ c), 0.0)))


def l_nov(spec: QuadraticMapSpec, check: bool = False) -> tuple[float, dict]:
    """max_{|c|=1} c.a + sqrt(c^T M c) via the stationary points of

        F(lam) = lam * (1 + sum_k a_k^2 / (lam - mu_k)),

    mu_k, a_k the eigenvalues of M and the projections of a on its
    eigenvectors.  Candidate values:

      - sqrt(F) at the roots of dF/dlam
      - sqrt(F) at poles mu_k with a_k = 0 and dF/dlam(mu_k) > 0
      - |P a| for P the projector on the null space of M, where
        sqrt(c^T M c) is not differentiable
    """
    a, M = nov_ingredients(spec)
    mu, U = np.linalg.eigh(M)
    scale = max(1.0, float(np.max(np.abs(mu))))
    if mu[0] < -TOL_PSD * scale * max(1, spec.n):
        raise NumericalFailure(f"trace matrix M is not positive semidefinite (min eigenvalue {mu[0]:.3e})")
    mu = np.maximum(mu, 0.0)
    proj = U.T @ a

    # merge repeated eigenvalues
    tol = 1e-12 * scale
    poles: list[float] = []
    wts: list[float] = []
    for lam_k, ak in zip(mu, proj):
        if poles and abs(lam_k - poles[-1]) <= tol:
            wts[-1] += ak**2
        else:
            poles.append(float(lam_k))
            wts.append(float(ak**2))
    poles_a = np.array(poles)
    wts_a = np.array(wts)
    anorm2 = float(a @ a)
    # weights below ~ulp(pole)^2 cannot move the stationary point off the pole
    zero_w = wts_a <= 1e-20 * max(anorm2, scale * scale)
    zero_pole = poles_a <= tol

    def F(lam: float) -> float:
        total = lam
        for p, wk, zw in zip(poles_a, wts_a, zero_w):
            if zw:
                continue
            total += wk if p == 0.0 and lam == 0.0 else lam * wk / (lam - p)
        return total

    # dF/dlam = 1 - sum_k mu_k a_k^2 / (lam - mu_k)^2; terms with mu_k a_k^2 = 0 drop out
    act = ~(zero_w | zero_pole)
    p_act = poles_a[act]
    w_act = wts_a[act] * poles_a[act]

    def dF(lam: float) -> float:
        return 1.0 - float(np.sum(w_act / (lam - p_act) ** 2))

    def d2F(lam: float) -> float:
        return float(np.sum(2 * w_act / (lam - p_act) ** 3))

    def root(f, lo, hi, xtol):
        flo, fhi = f(lo), f(hi)
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        if (flo > 0) == (fhi > 0):
            return None
        return brentq(f, lo, hi, xtol=xtol)

    stationary: list[float] = []
    if p_act.size:
        span = math.sqrt(float(w_act.sum())) + 1.0
        found = [root(dF, p_act[0] - span, np.nextafter(p_act[0], -np.inf), 1e-14)]
        for lo, hi in zip(p_act[:-1], p_act[1:]):
            eps = 1e-12 * (hi - lo)
            # dF is concave between poles: find its maximum, then the roots on either side
            top = root(d2F, lo + eps, hi - eps, 1e-15)
            if top is not None and dF(top) > 0:
                found.append(root(dF, lo + eps, top, 1e-15))
                found.append(root(dF, top, hi - eps, 1e-15))
        found.append(root(dF, np.nextafter(p_act[-1], np.inf), p_act[-1] + span, 1e-14))
        stationary = [r for r in found if r is not None]

    pinned = [float(p) for p, zw in zip(poles_a, zero_w) if zw and dF(p) > 0]

    candidates = [math.sqrt(max(F(lam), 0.0)) for lam in stationary + pinned]
    null = mu <= tol
    null_value = float(np.linalg.norm(proj[null])) if np.any(null) else None
    if null_value is not None:
        candidates.append(null_value)
    value = max(candidates) if candidates else 0.0
    meta = {
        "stationary": stationary,
        "pinned": pinned,
        "null_space_value": null_value,
    }
    if check:
        direct = l_nov_direct(spec)
        meta["direct"] = direct
        if abs(direct - value) > 1e-6 * max(1.0, value):
            raise NumericalFailure(f"L_nov recipe {value!r} disagrees with direct maximization {direct!r}")
    return value, meta


def l_nov_direct(spec: QuadraticMapSpec, samples: int = 4096, seed: int = 0) -> float:
    """Sampled maximization of c.a + sqrt(c^T M c) with Nelder-Mead polish."""
    a, M = nov_ingredients(spec)
    m = spec.m
    rng = np.random.default_rng(seed)
    C = rng.normal(size=(samples, m))
    C /= np.linalg.norm(C, axis=1, keepdims=True)
    vals = C @ a + np.sqrt(np.maximum(np.einsum("ki,ij,kj->k", C, M, C), 0.0))
    if m == 1:
        return float(vals.max())
    best = float(vals.max())
    for i in np.argsort(-vals)[:5]:
        to_sphere = chart(C[i])
        res = minimize(
            lambda u: -_nov_objective(to_sphere(u), a, M),
            np.zeros(m - 1),
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-15, "maxfev": 4000},
        )
        best = max(best, -float(res.fun))
    return best


# -- sampling lower bound -----------------------------------------------------


def _random_unit(rng: np.random.Generator, k: int, n: int, is_complex: bool) -> np.ndarray:
    X = rng.normal(size=(k, n))
    if is_complex:
        X = X + 1j * rng.normal(size=(k, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def _forms(spec: QuadraticMapSpec, X: np.ndarray) -> np.ndarray:
    """q_i(x) = x*A_i x for rows of X, shape (k, m)."""
    return np.real(np.einsum("ki,mij,kj->km", X.conj(), spec.A, X))


def _ascend(spec: QuadraticMapSpec, x: np.ndarray, iters: int) -> tuple[float, np.ndarray]:
    """Ascent of ||q(x)|| on the unit sphere, q_i(x) = x*A_i x.

    Alternates c = q(x)/|q(x)| with x = top eigenvector of c.A.  Since
    ||q(x')|| >= c.q(x') = lambda_max(c.A) >= c.q(x) = ||q(x)||, the
    objective never decreases and every iterate is feasible.
    """
    best = float(np.linalg.norm(_forms(spec, x[None, :])[0]))
    for _ in range(iters):
        q = _forms(spec, x[None, :])[0]
        G = np.tensordot(q, spec.A, axes=1)
        w, V = np.linalg.eigh(G)
        x_new = V[:, -1]
        val = float(np.linalg.norm(_forms(spec, x_new[None, :])[0]))
        if val <= best * (1 + 1e-15):
            break
        best, x = val, x_new
    return best, x


def l_lower_bound(spec: QuadraticMapSpec, samples: int = 2000, seed: int = 42, polish: int = 5) -> float:
    """Certified lower bound on L(A): max over evaluated unit x of ||(x*A_i x)_i||."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    X = _random_unit(rng, samples, spec.n, spec.is_complex)
    vals = np.linalg.norm(_forms(spec, X), axis=1)
    best = float(vals.max())
    for i in np.argsort(-vals, kind="stable")[:polish]:
        val, _ = _ascend(spec, X[i], 500)
        best = max(best, val)
    return best


def lipschitz_report(
    spec: QuadraticMapSpec, samples: int = 2000, seed: int = 42, check: bool = False
) -> LipschitzReport:
    nov, meta = l_nov(spec, check=check)
    return LipschitzReport(
        L_P=l_polyak(spec),
        L_new=l_new(spec),
        L_n=l_n(spec),
        L_nov=nov,
        L_lb=l_lower_bound(spec, samples, seed),
        meta={"L_nov": meta, "samples": samples, "seed": seed},
    )
