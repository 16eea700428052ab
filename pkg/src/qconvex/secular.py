"""Minimize c.f(x) over the sphere |x|^2 = z via the secular equation.

With c.A = sum_k lambda_k x_k x_k* and c.v = sum_k alpha_k x_k, stationary
points satisfy (c.A - lam) x = c.v and the minimizer uses the smallest
multiplier, which solves

    z = sum_k |alpha_k|^2 / (lambda_k - lam)^2,   lam < lambda_min,

unless c.v is orthogonal to the bottom eigenspace and the pseudo-inverse
solution at lam = lambda_min already has squared norm <= z (hard case).
The support value is F_c(z) = z*lam - sum_k |alpha_k|^2 / (lambda_k - lam).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidInputError, NumericalFailure
from .model import QuadraticMapSpec, eval_map
from .spectral import TOL_CLUSTER, TOL_NULL, SpectralData, spectral_data

MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class SecularSolution:
    lambda_star: float
    x: np.ndarray
    hard_case: bool
    unique: bool
    F_value: float
    z: float


def _solve_regular(w: np.ndarray, asq: np.ndarray, z: float, cv_norm: float) -> float:
    """Root lam < lambda_min of sum asq/(w - lam)^2 = z.

    Newton on psi(lam) = 1/sqrt(s(lam)) - 1/sqrt(z), which is close to linear
    near the root, safeguarded by bisection on a bracket where s is
    monotone increasing.
    """
    lmin = float(w[0])
    lo = lmin - cv_norm / math.sqrt(z) - 1.0
    hi = lmin
    lam = lmin - cv_norm / math.sqrt(z)
    tol_f = 1e-12 * max(1.0, z)
    tol_x = 1e-14 * (1.0 + abs(lmin))
    for _ in range(MAX_ITER):
        d = w - lam
        s = float(np.sum(asq / d**2))
        if abs(s - z) <= tol_f:
            return lam
        if s < z:
            lo = lam
        else:
            hi = lam
        if hi - lo <= tol_x:
            return lam
        ds = 2.0 * float(np.sum(asq / d**3))
        # psi' = -ds / (2 s^1.5)
        if s > 0 and ds > 0:
            step = (1.0 / math.sqrt(s) - 1.0 / math.sqrt(z)) / (0.5 * ds / s**1.5)
            cand = lam + step
        else:
            cand = math.nan
        if not (lo < cand < hi):
            cand = 0.5 * (lo + hi)
        lam = cand
    d = w - lam
    if abs(float(np.sum(asq / d**2)) - z) > 1e-8 * max(1.0, z):
        raise NumericalFailure("secular equation did not converge")
    return lam


def secular_min(
    sd: SpectralData,
    z: float,
    tol_null: float = TOL_NULL,
) -> SecularSolution:
    """Minimize c.f(x) on |x|^2 = z for the direction held in ``sd``."""
    if not z > 0 or not math.isfinite(z):
        raise InvalidInputError(f"z must be a positive finite number, got {z}")
    w = sd.eigenvalues
    asq = sd.alphas
    V = sd.eigenvectors
    bottom = sd.bottom
    lmin = sd.lambda_min
    cvsq = sd.cv_norm_sq

    proj = float(np.sum(asq[bottom]))
    rest = ~bottom
    with np.errstate(divide="ignore"):
        residual = float(np.sum(asq[rest] / (w[rest] - lmin) ** 2))

    if proj > tol_null * cvsq or residual > z:
        lam = _solve_regular(w, asq, z, math.sqrt(cvsq))
        beta = sd.coeffs / (w - lam)
        x = V @ beta
        F = z * lam - float(np.sum(asq / (w - lam)))
        return SecularSolution(lam, x, False, True, F, z)

    # hard case: multiplier pinned at the bottom of the spectrum
    beta = np.zeros_like(sd.coeffs)
    beta[rest] = sd.coeffs[rest] / (w[rest] - lmin)
    free_sq = max(z - residual, 0.0)
    k0 = int(np.flatnonzero(bottom)[0])
    beta[k0] = math.sqrt(free_sq)
    x = V @ beta
    F = z * lmin - float(np.sum(asq[rest] / (w[rest] - lmin)))
    if cvsq == 0.0:
        unique = False
    else:
        unique = free_sq <= 1e-12 * max(1.0, z)
    return SecularSolution(lmin, x, True, unique, F, z)


def support_value(sd: SpectralData, z: float, tol_null: float = TOL_NULL) -> float:
    """F_c(z): minimum of c.f(x) over |x|^2 = z."""
    return secular_min(sd, z, tol_null).F_value


def support_point(
    spec: QuadraticMapSpec,
    c,
    z: float,
    tol_cluster: float = TOL_CLUSTER,
    tol_null: float = TOL_NULL,
):
    """Return (x, y, solution) for the point where c.y touches f(|x|^2 = z) from below."""
    sd = spectral_data(spec, c, tol_cluster)
    sol = secular_min(sd, z, tol_null)
    x = sol.x if spec.is_complex else np.real(sol.x)
    return x, eval_map(spec, x), sol


def stationary_multipliers(sd: SpectralData, z: float) -> np.ndarray:
    """All real roots of sum |alpha_k|^2/(lambda_k - lam)^2 = z, ascending.

    Between consecutive poles the left-hand side is convex, so each gap
    holds zero, one or two roots; the outer intervals hold one each.
    """
    keep = sd.alphas > 0
    if not np.any(keep):
        return np.empty(0)
    poles, inv = np.unique(sd.eigenvalues[keep], return_inverse=True)
    wts = np.bincount(inv, weights=sd.alphas[keep])

    def phi(lam):
        return float(np.sum(wts / (poles - lam) ** 2)) - z

    def dphi(lam):
        return float(np.sum(2 * wts / (poles - lam) ** 3))

    span = math.sqrt(float(wts.sum()) / z) + 1.0
    roots = [brentq(phi, poles[0] - span, np.nextafter(poles[0], -np.inf), xtol=1e-15)]
    for a, b in zip(poles[:-1], poles[1:]):
        eps = 1e-12 * (b - a)
        mid = brentq(dphi, a + eps, b - eps, xtol=1e-15)
        if phi(mid) < 0:
            roots.append(brentq(phi, a + eps, mid, xtol=1e-15))
            roots.append(brentq(phi, mid, b - eps, xtol=1e-15))
    roots.append(brentq(phi, np.nextafter(poles[-1], np.inf), poles[-1] + span, xtol=1e-15))
    return np.array(roots)


def stationary_value(sd: SpectralData, lam: float, z: float) -> float:
    """F_c evaluated at a stationary multiplier lam."""
    return z * lam - float(np.sum(sd.alphas / (sd.eigenvalues - lam)))
