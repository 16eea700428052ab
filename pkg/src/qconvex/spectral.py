"""Per-direction spectral data of c.A and the epsilon -> 0+ pseudo-resolvent limit.

For a dual direction c the objective behind eps_max, eps_tilde_max and the
IJNR condition is

    lim_{e -> 0+} |(c.A - s + e)^{-1} c.v|^2

with shift s = min(lambda_min, 0) ("lambda_m" mode) or s = lambda_min
("lambda_min" mode).  The limit is evaluated analytically from the eigen
expansion: +inf if c.v has a component in the eigenspace of s, otherwise
the pseudo-inverse sum over the remaining eigenvalues.

Taking the limit per direction before minimizing over c gives the same
number as minimizing first: the e-family is pointwise nondecreasing as e
decreases, and a monotone family of continuous functions on the compact
sphere has min-of-limit equal to limit-of-min.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure
from .model import QuadraticMapSpec

TOL_CLUSTER = 1e-9
TOL_NULL = 1e-18
SHIFT_MODES = ("lambda_m", "lambda_min")


def cluster_tol(eigenvalues: np.ndarray, tol_cluster: float = TOL_CLUSTER) -> np.ndarray:
    """Absolute cluster width tol * max(1, spectral radius), broadcast over leading axes."""
    rad = np.max(np.abs(eigenvalues), axis=-1)
    return tol_cluster * np.maximum(1.0, rad)


def fix_phase(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of every eigenvector (column) real positive."""
    idx = np.argmax(np.abs(vecs), axis=-2)
    pivot = np.take_along_axis(vecs, idx[..., None, :], axis=-2)
    phase = pivot / np.abs(pivot)
    return vecs / phase


@dataclass(frozen=True, eq=False)
class SpectralData:
    c: np.ndarray
    eigenvalues: np.ndarray       # ascending
    eigenvectors: np.ndarray      # columns, phase-fixed
    coeffs: np.ndarray            # alpha_k with c.v = sum alpha_k x_k
    cv: np.ndarray
    tol_cluster: float = TOL_CLUSTER

    @property
    def alphas(self) -> np.ndarray:
        """|alpha_k|^2."""
        return np.abs(self.coeffs) ** 2

    @property
    def cv_norm_sq(self) -> float:
        return float(np.real(np.vdot(self.cv, self.cv)))

    @property
    def tau(self) -> float:
        return float(cluster_tol(self.eigenvalues, self.tol_cluster))

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def bottom(self) -> np.ndarray:
        """Mask of the bottom eigenvalue cluster."""
        return self.eigenvalues - self.eigenvalues[0] <= self.tau

    @property
    def min_multiplicity(self) -> int:
        return int(np.count_nonzero(self.bottom))

    @property
    def min_projection_sq(self) -> float:
        return float(np.sum(self.alphas[self.bottom]))


def _eigh(M: np.ndarray):
    try:
        w, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigen-decomposition failed: {exc}") from None
    if not np.all(np.isfinite(w)):
        raise NumericalFailure("eigen-decomposition returned non-finite eigenvalues")
    return w, V


def spectral_data(spec: QuadraticMapSpec, c, tol_cluster: float = TOL_CLUSTER) -> SpectralData:
    c = np.asarray(c, dtype=float)
    cA, cv = spec.combine(c)
    w, V = _eigh(cA)
    V = fix_phase(V)
    coeffs = V.conj().T @ cv
    return SpectralData(c, w, V, coeffs, cv, tol_cluster)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QCONVEX_THREADS", "1")))
    except ValueError:
        return 1


def batch_spectral(spec: QuadraticMapSpec, C: np.ndarray, vectors: bool = False):
    """Eigenvalues (k, n), |alpha|^2 (k, n) and |c.v|^2 (k,) for rows of C.

    With ``vectors=True`` the phase-fixed eigenvectors (k, n, n) and the
    coefficients alpha (k, n) are returned as well.  Work is split into
    chunks over QCONVEX_THREADS threads; LAPACK releases the GIL.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    cA = np.tensordot(C, spec.A, axes=1)
    cv = C @ spec.v

    def work(sl):
        w, V = _eigh(cA[sl])
        return w, fix_phase(V)

    k = C.shape[0]
    nthreads = min(_threads(), max(1, k // 256))
    if nthreads > 1:
        bounds = np.linspace(0, k, nthreads + 1).astype(int)
        slices = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(nthreads) as pool:
            parts = list(pool.map(work, slices))
        w = np.concatenate([p[0] for p in parts])
        V = np.concatenate([p[1] for p in parts])
    else:
        w, V = work(slice(None))
    coeffs = np.einsum("kji,kj->ki", V.conj(), cv)
    asq = np.abs(coeffs) ** 2
    cvsq = np.real(np.einsum("ki,ki->k", cv.conj(), cv))
    if vectors:
        return w, asq, cvsq, V, coeffs
    return w, asq, cvsq


def resolvent_values(
    w: np.ndarray,
    asq: np.ndarray,
    cvsq: np.ndarray,
    mode: str,
    tol_cluster: float = TOL_CLUSTER,
    tol_null: float = TOL_NULL,
) -> np.ndarray:
    """Vectorized pseudo-resolvent limit for rows of eigen data."""
    if mode not in SHIFT_MODES:
        raise ValueError(f"shift mode must be one of {SHIFT_MODES}")
    w = np.atleast_2d(w)
    asq = np.atleast_2d(asq)
    tau = cluster_tol(w, tol_cluster)[:, None]
    s = w[:, :1] if mode == "lambda_min" else np.minimum(w[:, :1], 0.0)
    gap = w - s
    at_shift = np.abs(gap) <= tau
    proj = np.sum(np.where(at_shift, asq, 0.0), axis=1)
    blocked = np.any(at_shift, axis=1) & (proj > tol_null * np.atleast_1d(cvsq))
    above = gap > tau
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(above, asq / np.where(above, gap, 1.0) ** 2, 0.0)
    out = np.sum(terms, axis=1)
    out[blocked] = np.inf
    return out


def pseudo_resolvent_sq(
    spec: QuadraticMapSpec,
    c,
    shift_mode: str = "lambda_m",
    tol_cluster: float = TOL_CLUSTER,
    tol_null: float = TOL_NULL,
) -> float:
    """lim_{e->0+} |(c.A - s + e)^{-1} c.v|^2 for a single direction; may be math.inf."""
    sd = spectral_data(spec, c, tol_cluster)
    val = resolvent_values(sd.eigenvalues, sd.alphas, np.array([sd.cv_norm_sq]), shift_mode, tol_cluster, tol_null)
    out = float(val[0])
    return math.inf if math.isinf(out) else out


def in_dual_cone(w: np.ndarray, tol_cluster: float = TOL_CLUSTER) -> np.ndarray:
    """Membership in C = {c : lambda_min(c.A) <= 0}, with cluster tolerance."""
    w = np.atleast_2d(w)
    return w[:, 0] <= cluster_tol(w, tol_cluster)
