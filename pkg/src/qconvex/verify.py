"""Empirical checks of a radius claim on f(B_eps).

Boundary samples are support points of the sphere |x|^2 = eps^2; image
samples are images of uniform points of the ball.  The audit is one-sided:
it can refute convexity of f(B_eps) (or refute that the boundary samples
bound it) but never proves it.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import IO

import numpy as np
from scipy.stats import norm, qmc

from .errors import InvalidInputError
from .model import QuadraticMapSpec, eval_map_batch
from .search import angles_to_dirs
from .secular import support_point
from .spectral import TOL_CLUSTER, TOL_NULL

TAU_AUDIT = 1e-7
HULL_DEPTH = 16


@dataclass
class BoundarySample:
    eps: float
    c: np.ndarray
    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    hard_case: np.ndarray
    support: np.ndarray
    theta: np.ndarray | None = None


@dataclass
class AuditReport:
    eps: float
    property2_ok: bool
    property2_violations: list
    property2_marginal: list
    convexity_ok: bool
    support_violations: list
    max_support_violation: float
    hull_violations: list
    curvature_ok: bool | None
    min_curvature: float | None
    n_directions: int
    n_samples: int
    seed: int
    tau_audit: float
    meta: dict = field(default_factory=dict)


def boundary_directions(m: int, count: int, seed: int = 42) -> tuple[np.ndarray, np.ndarray | None]:
    if m == 1:
        return np.array([[-1.0], [1.0]]), None
    if m == 2:
        theta = 2 * np.pi * np.arange(count) / count
        return angles_to_dirs(theta), theta
    sob = qmc.Sobol(d=m, scramble=True, seed=seed)
    u = sob.random_base2(int(math.ceil(math.log2(max(count, 2)))))[:count]
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True), None


def sample_boundary(
    spec: QuadraticMapSpec,
    eps: float,
    directions: int = 360,
    seed: int = 42,
    tol_cluster: float = TOL_CLUSTER,
    tol_null: float = TOL_NULL,
) -> BoundarySample:
    """Support points of f(|x| = eps) for a deterministic set of directions."""
    if not eps > 0:
        raise InvalidInputError(f"eps must be positive, got {eps}")
    min_dirs = 2 if spec.m == 1 else 8
    if spec.m > 1 and directions < min_dirs:
        raise InvalidInputError(f"need at least {min_dirs} directions for m={spec.m}")
    C, theta = boundary_directions(spec.m, directions, seed)
    z = eps * eps
    xs, ys, lams, hard, F = [], [], [], [], []
    for c in C:
        x, y, sol = support_point(spec, c, z, tol_cluster, tol_null)
        xs.append(x)
        ys.append(y)
        lams.append(sol.lambda_star)
        hard.append(sol.hard_case)
        F.append(sol.F_value)
    return BoundarySample(
        eps, C, np.array(xs), np.array(ys), np.array(lams), np.array(hard, dtype=bool), np.array(F), theta
    )


def check_property2(spec: QuadraticMapSpec, eps: float, directions: int = 360, seed: int = 42,
                    tol_cluster: float = TOL_CLUSTER, boundary: BoundarySample | None = None) -> dict:
    """Flag directions whose outer layer is not on the sphere, i.e. lambda(eps^2) >= -tol.

    Directions with |lambda| <= tol are additionally reported as marginal.
    """
    b = boundary if boundary is not None else sample_boundary(spec, eps, directions, seed, tol_cluster)
    w_scale = np.array([max(1.0, float(np.max(np.abs(np.linalg.eigvalsh(spec.combine(c)[0]))))) for c in b.c])
    tol = tol_cluster * w_scale
    flagged = b.lam >= -tol
    marginal = np.abs(b.lam) <= tol
    return {
        "ok": not bool(np.any(flagged)),
        "violations": [c.tolist() for c in b.c[flagged]],
        "marginal": [c.tolist() for c in b.c[marginal]],
        "lambda": b.lam,
    }


def sample_image(spec: QuadraticMapSpec, eps: float, count: int, seed: int = 42) -> np.ndarray:
    """f(x) for `count` seeded points uniform in the ball |x| <= eps; shape (count, m)."""
    if count <= 0:
        return np.empty((0, spec.m))
    rng = np.random.default_rng(seed)
    d = spec.real_dim
    g = rng.normal(size=(count, d))
    r = eps * rng.uniform(size=count) ** (1.0 / d)
    g *= (r / np.linalg.norm(g, axis=1))[:, None]
    X = g[:, : spec.n] + 1j * g[:, spec.n:] if spec.is_complex else g
    return eval_map_batch(spec, X)


def discrete_curvature(y: np.ndarray) -> np.ndarray:
    """Cross products of consecutive edges of the closed polygon y (k, 2)."""
    e = np.roll(y, -1, axis=0) - y
    e_next = np.roll(e, -1, axis=0)
    return e[:, 0] * e_next[:, 1] - e[:, 1] * e_next[:, 0]


def _cross(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> np.ndarray:
    ab = b - a
    ap = p - a
    return ab[..., 0] * ap[..., 1] - ab[..., 1] * ap[..., 0]


class _HullRefiner:
    """Inscribed polygon of the support curve, refined on demand between vertices."""

    def __init__(self, spec, z, tol_cluster, tol_null):
        self.spec, self.z = spec, z
        self.tol_cluster, self.tol_null = tol_cluster, tol_null
        self.cache: dict[float, np.ndarray] = {}
        self.evaluations = 0

    def point(self, t: float) -> np.ndarray:
        if t not in self.cache:
            _, y, _ = support_point(self.spec, angles_to_dirs(t), self.z, self.tol_cluster, self.tol_null)
            self.cache[t] = y
            self.evaluations += 1
        return self.cache[t]

    def inside(self, p, ta, ya, tb, yb, tol, depth) -> bool:
        if _cross(ya, yb, p) >= -tol * max(1.0, float(np.linalg.norm(yb - ya))):
            return True
        if depth == 0:
            return False
        tm = 0.5 * (ta + tb)
        ym = self.point(tm)
        return self.inside(p, ta, ya, tm, ym, tol, depth - 1) and self.inside(p, tm, ym, tb, yb, tol, depth - 1)


def convexity_audit(
    spec: QuadraticMapSpec,
    eps: float,
    directions: int = 360,
    count: int = 2000,
    seed: int = 42,
    tol_cluster: float = TOL_CLUSTER,
    tol_null: float = TOL_NULL,
) -> AuditReport:
    """Refutation tests of convexity of f(B_eps).

    The support test compares image samples against the sphere support
    values, so it also fails when the minimizer for some c lies inside the
    ball (property 2 broken) even if the image itself is convex.  The m = 2
    hull test refines the inscribed boundary polygon near each suspect point
    before declaring a violation.
    """
    b = sample_boundary(spec, eps, directions, seed, tol_cluster, tol_null)
    p2 = check_property2(spec, eps, directions, seed, tol_cluster, boundary=b)
    Y = sample_image(spec, eps, count, seed)

    scale = max(1.0, float(np.max(np.abs(b.y))), float(np.max(np.abs(Y))) if len(Y) else 0.0)
    tau = TAU_AUDIT * scale

    # support test: c.y' >= F_c - tau for every image sample y'
    gaps = Y @ b.c.T - b.support[None, :] if len(Y) else np.empty((0, len(b.c)))
    bad = gaps < -tau
    support_violations = [
        {"sample": int(i), "c": b.c[j].tolist(), "gap": float(gaps[i, j])} for i, j in zip(*np.nonzero(bad))
    ][:100]
    max_violation = float(max(0.0, -gaps.min())) if gaps.size else 0.0

    hull_violations: list = []
    curvature_ok = None
    min_curv = None
    meta: dict = {}
    if spec.m == 2:
        y = b.y
        area = 0.5 * float(np.sum(y[:, 0] * np.roll(y[:, 1], -1) - np.roll(y[:, 0], -1) * y[:, 1]))
        orient = 1.0 if area >= 0 else -1.0
        curv = orient * discrete_curvature(y)
        min_curv = float(curv.min())
        curvature_ok = bool(min_curv >= -tau * scale)

        refiner = _HullRefiner(spec, eps * eps, tol_cluster, tol_null)
        k = len(y)
        theta = np.append(b.theta, 2 * np.pi)
        ya_all, yb_all = y, np.roll(y, -1, axis=0)
        if orient < 0:
            ya_all, yb_all = yb_all, ya_all
        edge_len = np.maximum(1.0, np.linalg.norm(yb_all - ya_all, axis=1))
        cr = _cross(ya_all[None, :, :], yb_all[None, :, :], Y[:, None, :]) if len(Y) else np.empty((0, k))
        failing = cr < -tau * edge_len[None, :]
        for i in np.nonzero(failing.any(axis=1))[0]:
            for j in np.nonzero(failing[i])[0]:
                ta, tb = theta[j], theta[j + 1]
                if orient < 0:
                    ta, tb = tb, ta
                if not refiner.inside(Y[i], ta, ya_all[j], tb, yb_all[j], tau, HULL_DEPTH):
                    hull_violations.append({"sample": int(i), "y": Y[i].tolist()})
                    break
        meta["hull_refinements"] = refiner.evaluations
        meta["orientation"] = int(orient)

    convexity_ok = not support_violations and not hull_violations and curvature_ok is not False
    return AuditReport(
        eps=eps,
        property2_ok=p2["ok"],
        property2_violations=p2["violations"],
        property2_marginal=p2["marginal"],
        convexity_ok=convexity_ok,
        support_violations=support_violations,
        max_support_violation=max_violation,
        hull_violations=hull_violations[:100],
        curvature_ok=curvature_ok,
        min_curvature=min_curv,
        n_directions=len(b.c),
        n_samples=int(len(Y)),
        seed=seed,
        tau_audit=tau,
        meta=meta,
    )


# -- CSV export ---------------------------------------------------------------


def boundary_columns(spec: QuadraticMapSpec) -> list[str]:
    cols = [f"c{i}" for i in range(spec.m)]
    if spec.is_complex:
        for i in range(spec.n):
            cols += [f"x{i}_re", f"x{i}_im"]
    else:
        cols += [f"x{i}" for i in range(spec.n)]
    cols += [f"y{i}" for i in range(spec.m)]
    return cols + ["lambda", "hard_case"]


def write_boundary_csv(spec: QuadraticMapSpec, b: BoundarySample, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(boundary_columns(spec))
    fmt = "{:.17g}".format
    for c, x, y, lam, hard in zip(b.c, b.x, b.y, b.lam, b.hard_case):
        if spec.is_complex:
            xs = [fmt(v) for xi in x for v in (xi.real, xi.imag)]
        else:
            xs = [fmt(float(np.real(xi))) for xi in x]
        row = [fmt(v) for v in c] + xs + [fmt(v) for v in y] + [fmt(lam), str(int(bool(hard)))]
        writer.writerow(row)


def read_boundary_csv(spec: QuadraticMapSpec, fh: IO[str], eps: float) -> BoundarySample:
    reader = csv.reader(fh)
    header = next(reader)
    if header != boundary_columns(spec):
        raise InvalidInputError("boundary CSV header does not match the instance")
    rows = np.array([[float(v) for v in r] for r in reader])
    m, n = spec.m, spec.n
    c = rows[:, :m]
    if spec.is_complex:
        xr = rows[:, m : m + 2 * n]
        x = xr[:, 0::2] + 1j * xr[:, 1::2]
        off = m + 2 * n
    else:
        x = rows[:, m : m + n]
        off = m + n
    y = rows[:, off : off + m]
    lam = rows[:, off + m]
    hard = rows[:, off + m + 1].astype(bool)
    support = np.einsum("ki,ki->k", c, y)
    return BoundarySample(eps, c, x, y, lam, hard, support)
