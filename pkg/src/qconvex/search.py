"""Deterministic minimization over the unit sphere of dual directions c.

Grids: m = 1 enumerates c = -1, +1; m = 2 uses a uniform angular grid;
m >= 3 uses scrambled Sobol points pushed onto the sphere.  Grid minima are
polished locally (bounded Brent in the angle for m = 2, Nelder-Mead on a
tangent-plane chart otherwise).

The pseudo-resolvent objective is +inf on open sets and finite only on
the positive-definite region and on isolated "spike" directions where c.v
loses its bottom-eigenspace component.  Spikes are located explicitly:
sign changes of the (continuously tracked) bottom projection for real
m = 2, projection minima for complex data, and Newton projection onto the
zero set followed by a search along it for m >= 3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar
from scipy.stats import norm, qmc

from .model import QuadraticMapSpec
from .spectral import TOL_CLUSTER, TOL_NULL, batch_spectral, in_dual_cone, resolvent_values

DEFAULT_GRID_M2 = 720
DEFAULT_SAMPLES = 4096
BIG = 1e300
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class SearchOptions:
    grid_density: int | None = None
    refine_steps: int = 200
    seed: int = 42
    tol_cluster: float = TOL_CLUSTER
    tol_null: float = TOL_NULL

    def density(self, m: int) -> int:
        if m == 1:
            return 2
        if self.grid_density is not None:
            return int(self.grid_density)
        return DEFAULT_GRID_M2 if m == 2 else DEFAULT_SAMPLES

    def as_dict(self, m: int) -> dict:
        return {
            "grid_density": self.density(m),
            "refine_steps": self.refine_steps,
            "seed": self.seed,
            "tol_cluster": self.tol_cluster,
            "tol_null": self.tol_null,
            "certified": m <= 2,
        }


@dataclass
class SearchResult:
    value: float
    c: np.ndarray | None
    evaluations: int
    meta: dict = field(default_factory=dict)


def angles_to_dirs(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def sphere_directions(m: int, opts: SearchOptions) -> np.ndarray:
    if m == 1:
        return np.array([[-1.0], [1.0]])
    k = opts.density(m)
    if m == 2:
        return angles_to_dirs(2 * np.pi * np.arange(k) / k)
    sob = qmc.Sobol(d=m, scramble=True, seed=opts.seed)
    u = sob.random_base2(int(math.ceil(math.log2(max(k, 2)))))[:k]
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def tangent_basis(c: np.ndarray) -> np.ndarray:
    """Orthonormal basis (m, m-1) of the tangent plane of the sphere at c."""
    m = c.size
    q, _ = np.linalg.qr(np.column_stack([c, np.eye(m)]))
    return q[:, 1:m]


def chart(c0: np.ndarray):
    T = tangent_basis(c0)

    def to_sphere(u):
        c = c0 + T @ np.asarray(u, dtype=float)
        return c / np.linalg.norm(c)

    return to_sphere


def pick_best(cands: list[tuple[float, np.ndarray]]) -> tuple[float, np.ndarray | None]:
    """Minimum value; among near-ties the lexicographically smallest direction."""
    if not cands:
        return math.inf, None
    vmin = min(v for v, _ in cands)
    if math.isinf(vmin):
        ties = [c for _, c in cands]
    else:
        tol = TIE_RTOL * max(1.0, abs(vmin))
        ties = [c for v, c in cands if v <= vmin + tol]
    best = min(ties, key=lambda c: tuple(np.round(c, 12)))
    vals = [v for v, c in cands if c is best]
    return vals[0], best


def _finite_or_big(v: float) -> float:
    return v if math.isfinite(v) else BIG


def refine_smooth(fun, c0: np.ndarray, step: float, opts: SearchOptions):
    """Local polish of a scalar function on the sphere starting at c0."""
    m = c0.size
    if m == 1:
        return fun(c0), c0
    if m == 2:
        t0 = math.atan2(c0[1], c0[0])
        res = minimize_scalar(
            lambda t: _finite_or_big(fun(angles_to_dirs(t))),
            bounds=(t0 - step, t0 + step),
            method="bounded",
            options={"xatol": 1e-13, "maxiter": opts.refine_steps},
        )
        c = angles_to_dirs(res.x)
    else:
        to_sphere = chart(c0)
        simplex = np.vstack([np.zeros(m - 1), step * np.eye(m - 1)])
        res = minimize(
            lambda u: _finite_or_big(fun(to_sphere(u))),
            np.zeros(m - 1),
            method="Nelder-Mead",
            options={"initial_simplex": simplex, "maxfev": opts.refine_steps, "xatol": 1e-12, "fatol": 1e-15},
        )
        c = to_sphere(res.x)
    return fun(c), c


def minimize_on_sphere(batch_fun, m: int, opts: SearchOptions, n_polish: int = 3) -> SearchResult:
    """Grid plus local polish for an objective given as batch_fun(C) -> values."""
    C = sphere_directions(m, opts)
    vals = np.asarray(batch_fun(C), dtype=float)
    evals = [C.shape[0]]

    def fun(c):
        evals[0] += 1
        return float(batch_fun(c[None, :])[0])

    cands = [(float(v), c) for v, c in zip(vals, C)]
    step = _grid_step(m, C.shape[0])
    for i in _best_indices(vals, n_polish):
        cands.append(refine_smooth(fun, C[i], step, opts))
    value, c = pick_best(cands)
    return SearchResult(value, c, evals[0], {"grid_points": int(C.shape[0])})


def _grid_step(m: int, k: int) -> float:
    if m == 1:
        return 0.0
    if m == 2:
        return 2 * np.pi / k
    # typical spacing of k points on S^{m-1}
    return float(min(1.0, 2.0 * k ** (-1.0 / (m - 1))))


def _best_indices(vals: np.ndarray, k: int) -> list[int]:
    order = np.argsort(vals, kind="stable")
    return [int(i) for i in order[:k] if math.isfinite(vals[i])]


class ResolventObjective:
    """Pseudo-resolvent limit as a function of c, with evaluation counting."""

    def __init__(self, spec: QuadraticMapSpec, mode: str, restrict: bool, opts: SearchOptions):
        self.spec = spec
        self.mode = mode
        self.restrict = restrict
        self.opts = opts
        self.evaluations = 0
        self.skipped = 0
        self.inside = 0

    def batch(self, C: np.ndarray, vectors: bool = False):
        out = batch_spectral(self.spec, C, vectors=vectors)
        w, asq, cvsq = out[:3]
        vals = resolvent_values(w, asq, cvsq, self.mode, self.opts.tol_cluster, self.opts.tol_null)
        if self.restrict:
            outside = ~in_dual_cone(w, self.opts.tol_cluster)
            self.skipped += int(np.count_nonzero(outside))
            self.inside += int(np.count_nonzero(~outside))
            vals[outside] = np.inf
        self.evaluations += C.shape[0]
        return (vals,) + tuple(out)

    def __call__(self, c: np.ndarray) -> float:
        return float(self.batch(np.asarray(c, dtype=float)[None, :])[0][0])

    # -- bottom projection helpers -----------------------------------------

    def bottom_projection(self, c: np.ndarray):
        """(signed projection, gradient wrt c, |c.v|, simple) for real data."""
        spec = self.spec
        cA, cv = spec.combine(c)
        w, V = np.linalg.eigh(cA)
        u = V[:, 0]
        p = float(np.real(np.vdot(u, cv)))
        gap = w[0] - w[1:] if w.size > 1 else np.empty(0)
        simple = w.size == 1 or (w[1] - w[0]) > 1e-8 * max(1.0, float(np.max(np.abs(w))))
        # first-order perturbation of the bottom eigenvector
        Au = np.einsum("mij,j->mi", spec.A, u)
        grad = np.real(spec.v @ u.conj())
        if w.size > 1 and simple:
            Vr = V[:, 1:]
            coupling = np.real(Au @ Vr.conj())          # (m, n-1): x_k* A_i u
            wk = np.real(Vr.conj().T @ cv)              # x_k* c.v
            grad = grad + coupling @ (wk / gap)
        return p, grad, float(np.linalg.norm(cv)), simple

    def relative_projection(self, c: np.ndarray) -> float:
        w, asq, cvsq = batch_spectral(self.spec, np.asarray(c, dtype=float)[None, :])
        tau = self.opts.tol_cluster * max(1.0, float(np.max(np.abs(w))))
        bottom = w[0] - w[0, 0] <= tau
        return float(np.sum(asq[0][bottom]) / max(cvsq[0], 1e-300))

    def project_to_spike(self, c: np.ndarray, iters: int = 40) -> np.ndarray | None:
        """Newton projection of c onto {bottom projection = 0} within the sphere."""
        c = c / np.linalg.norm(c)
        for _ in range(iters):
            p, g, cvn, simple = self.bottom_projection(c)
            if not simple:
                return None
            if abs(p) <= 1e-15 * max(cvn, 1e-300):
                return c
            gt = g - (g @ c) * c
            gn2 = float(gt @ gt)
            if gn2 == 0.0:
                return None
            step = -p * gt / gn2
            sn = float(np.linalg.norm(step))
            if sn > 0.5:
                step *= 0.5 / sn
            c = c + step
            c = c / np.linalg.norm(c)
        p, _, cvn, _ = self.bottom_projection(c)
        return c if abs(p) <= 1e-12 * max(cvn, 1e-300) else None


def minimize_resolvent(
    spec: QuadraticMapSpec, mode: str, opts: SearchOptions, restrict: bool = False
) -> SearchResult:
    """Minimize the pseudo-resolvent limit over the dual sphere (optionally over C only)."""
    m = spec.m
    obj = ResolventObjective(spec, mode, restrict, opts)
    C = sphere_directions(m, opts)
    vals, w, asq, cvsq, V, coeffs = obj.batch(C, vectors=True)
    cands: list[tuple[float, np.ndarray]] = [(float(v), c) for v, c in zip(vals, C)]
    meta = {"grid_points": int(C.shape[0]), "spike_candidates": 0}

    if m >= 2:
        spikes = _spike_candidates(obj, C, w, asq, cvsq, V, coeffs)
        meta["spike_candidates"] = len(spikes)
        cands.extend(spikes)

        step = _grid_step(m, C.shape[0])
        for i in _best_indices(vals, 3):
            cands.append(refine_smooth(obj, C[i], step, opts))

    value, c = pick_best(cands)
    if restrict:
        meta["skipped_outside_C"] = obj.skipped
        if obj.inside == 0:
            c = None
    return SearchResult(value, c, obj.evaluations, meta)


def _spike_candidates(obj, C, w, asq, cvsq, V, coeffs):
    spec, opts = obj.spec, obj.opts
    m = spec.m
    out = []
    tau = opts.tol_cluster * np.maximum(1.0, np.max(np.abs(w), axis=1))
    simple = (w[:, 1] - w[:, 0] > tau) if w.shape[1] > 1 else np.ones(len(w), bool)
    rel = asq[:, 0] / np.maximum(cvsq, 1e-300)

    if m == 2 and not spec.is_complex:
        k = len(C)
        u = np.real(V[:, :, 0])
        for i in range(k):
            j = (i + 1) % k
            # eigenvector signs are tracked pairwise, so the wrap-around flip is harmless
            sj = 1.0 if float(u[j] @ u[i]) >= 0 else -1.0
            pi_loc = float(np.real(coeffs[i, 0]))
            pj_loc = sj * float(np.real(coeffs[j, 0]))
            if not (simple[i] and simple[j]) or pi_loc * pj_loc > 0:
                continue
            ta = 2 * np.pi * i / k
            tb = ta + 2 * np.pi / k
            ref = u[i]

            def f(t, ref=ref):
                cA, cv = spec.combine(angles_to_dirs(t))
                _, Vt = np.linalg.eigh(cA)
                ut = np.real(Vt[:, 0])
                s = 1.0 if ut @ ref >= 0 else -1.0
                return s * float(ut @ np.real(cv))

            if pi_loc == 0.0:
                t = ta
            else:
                try:
                    t = brentq(f, ta, tb, xtol=1e-15, rtol=1e-15)
                except ValueError:
                    continue
            c = angles_to_dirs(t)
            out.append((obj(c), c))
        return out

    if m == 2:
        k = len(rel)
        loc = [i for i in range(k) if rel[i] <= rel[i - 1] and rel[i] <= rel[(i + 1) % k]]
        loc = sorted(loc, key=lambda i: rel[i])[:8]
        step = 2 * np.pi / k
        for i in loc:
            t0 = 2 * np.pi * i / k
            res = minimize_scalar(
                lambda t: obj.relative_projection(angles_to_dirs(t)),
                bounds=(t0 - step, t0 + step),
                method="bounded",
                options={"xatol": 1e-14},
            )
            c = angles_to_dirs(res.x)
            out.append((obj(c), c))
        return out

    # m >= 3
    order = np.argsort(np.where(simple, rel, np.inf), kind="stable")[:16]
    step = _grid_step(m, C.shape[0])
    for i in order:
        if not simple[i]:
            continue
        if spec.is_complex:
            to_sphere = chart(C[i])
            res = minimize(
                lambda u: obj.relative_projection(to_sphere(u)),
                np.zeros(m - 1),
                method="Nelder-Mead",
                options={"maxfev": opts.refine_steps, "xatol": 1e-14, "fatol": 1e-30},
            )
            c = to_sphere(res.x)
            out.append((obj(c), c))
            continue
        c = obj.project_to_spike(C[i])
        if c is not None:
            out.append((obj(c), c))

    if spec.is_complex:
        return out

    # walk along the zero set from the best few distinct spikes
    seeds = sorted((v, tuple(c)) for v, c in out if math.isfinite(v))
    chosen: list[np.ndarray] = []
    for _, c in seeds:
        c = np.array(c)
        if all(np.linalg.norm(c - d) > 1e-6 for d in chosen):
            chosen.append(c)
        if len(chosen) == 3:
            break
    for c in chosen:
        to_sphere = chart(c)

        def along(u, to_sphere=to_sphere):
            cc = obj.project_to_spike(to_sphere(u))
            return BIG if cc is None else _finite_or_big(obj(cc))

        simplex = np.vstack([np.zeros(m - 1), step * np.eye(m - 1)])
        res = minimize(
            along,
            np.zeros(m - 1),
            method="Nelder-Mead",
            options={"initial_simplex": simplex, "maxfev": opts.refine_steps, "xatol": 1e-10, "fatol": 1e-14},
        )
        cc = obj.project_to_spike(to_sphere(res.x))
        if cc is not None:
            out.append((obj(cc), cc))
    return out
