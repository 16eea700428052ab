"""Conservative lower estimates of eps_max^2.

    eps_P^2    = nu^2 / (4 L^2),  nu^2 = lambda_min(g),  g_ij = Re(v_i* v_j)
    eps_est^2  = min_{|c|=1} |c.v|^2 / (4 ||c.A||^2)
    eps_est^2  = 1 / (4 L^2(A_hat)),  A_hat_j = sum_i Lambda_ij A_i,  Lambda = g^{-1/2}

Any L used here must be an upper bound on L(A), otherwise the radius is
no longer conservative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .lipschitz import l_n, l_new, l_nov, l_polyak
from .model import TOL_PSD, QuadraticMapSpec, gram_matrix, is_regular, null_direction
from .search import SearchOptions, SearchResult, minimize_on_sphere

L_ESTIMATORS = ("min", "polyak", "new", "n", "nov")


@dataclass
class EstimateReport:
    eps_P_sq: float
    eps_est_sq: float
    eps_est_precond_sq: float | None
    nu_sq: float
    estimator: str
    L: float
    Lambda: np.ndarray | None
    meta: dict = field(default_factory=dict)


def upper_lipschitz(spec: QuadraticMapSpec, estimator: str = "min") -> float:
    if estimator == "polyak":
        return l_polyak(spec)
    if estimator == "new":
        return l_new(spec)
    if estimator == "n":
        return l_n(spec)
    if estimator == "nov":
        return l_nov(spec)[0]
    if estimator == "min":
        return min(l_new(spec), l_n(spec), l_nov(spec)[0])
    raise ValueError(f"unknown L estimator {estimator!r}; expected one of {L_ESTIMATORS}")


def _ratio(num: float, L: float) -> float:
    if num == 0.0:
        return 0.0
    if L == 0.0:
        return math.inf
    return num / (4.0 * L * L)


def eps_polyak(spec: QuadraticMapSpec, estimator: str = "min") -> float:
    """nu^2 / (4 L^2); 0 when the origin is not regular, inf for a linear map."""
    g = gram_matrix(spec)
    nu_sq = float(np.linalg.eigvalsh(g)[0])
    if nu_sq <= TOL_PSD * float(np.trace(g)):
        return 0.0
    return _ratio(nu_sq, upper_lipschitz(spec, estimator))


def _est_batch(spec: QuadraticMapSpec):
    def f(C):
        cA = np.tensordot(C, spec.A, axes=1)
        cv = C @ spec.v
        w = np.linalg.eigvalsh(cA)
        norm_sq = np.maximum(np.abs(w[:, 0]), np.abs(w[:, -1])) ** 2
        num = np.real(np.einsum("ki,ki->k", cv.conj(), cv))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = num / (4.0 * norm_sq)
        out[num == 0.0] = 0.0
        return out

    return f


def eps_est(spec: QuadraticMapSpec, search: SearchOptions | None = None):
    """min over the dual sphere of |c.v|^2 / (4 ||c.A||^2); returns the SearchResult.

    When v has rank < m the minimum is 0 at a null direction of the Gram
    matrix; meta["degenerate_direction"] flags the case c.A = 0 there too,
    where the ratio itself is undefined.
    """
    search = search or SearchOptions()
    if not is_regular(spec):
        c = null_direction(spec)
        cA, _ = spec.combine(c)
        scale = max(1.0, float(np.max(np.abs(spec.A))))
        degenerate = bool(np.max(np.abs(cA)) <= 1e-12 * scale)
        return SearchResult(0.0, c, 0, {"origin_regular": False, "degenerate_direction": degenerate})
    return minimize_on_sphere(_est_batch(spec), spec.m, search)


def preconditioner(spec: QuadraticMapSpec) -> np.ndarray:
    """Symmetric Lambda = g^{-1/2}, so that Lambda^T g Lambda = I."""
    g = gram_matrix(spec)
    w, U = np.linalg.eigh(g)
    if w[0] <= TOL_PSD * float(np.trace(g)):
        raise InvalidInputError("origin not regular: Gram matrix of v is singular")
    return (U / np.sqrt(w)) @ U.T


def eps_est_preconditioned(spec: QuadraticMapSpec, estimator: str = "min") -> tuple[float, np.ndarray]:
    Lam = preconditioner(spec)
    A_hat = np.tensordot(Lam.T, spec.A, axes=1)
    v_hat = Lam.T @ spec.v
    hat = QuadraticMapSpec(spec.field, A_hat, v_hat)
    return _ratio(1.0, upper_lipschitz(hat, estimator)), Lam


def estimate_report(
    spec: QuadraticMapSpec, search: SearchOptions | None = None, estimator: str = "min"
) -> EstimateReport:
    search = search or SearchOptions()
    g = gram_matrix(spec)
    nu_sq = float(np.linalg.eigvalsh(g)[0])
    est = eps_est(spec, search)
    try:
        pre, Lam = eps_est_preconditioned(spec, estimator)
    except InvalidInputError:
        pre, Lam = None, None
    return EstimateReport(
        eps_P_sq=eps_polyak(spec, estimator),
        eps_est_sq=est.value,
        eps_est_precond_sq=pre,
        nu_sq=nu_sq,
        estimator=estimator,
        L=upper_lipschitz(spec, estimator),
        Lambda=Lam,
        meta={"eps_est_argmin_c": est.c, "evaluations": est.evaluations, **est.meta, **search.as_dict(spec.m)},
    )
