"""Sharp radii eps_max, eps_tilde_max and the IJNR convexity verdict."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import QuadraticMapSpec, is_regular, null_direction
from .search import SearchOptions, SearchResult, minimize_resolvent

TOL_VERDICT = 1e-9

NOT_REGULAR = "origin-not-regular"

STRONGLY_CONVEX = "strongly-convex-smooth"
STRICTLY_CONVEX = "strictly-convex-boundary"
EMPTY_SHELL = "empty-shell-boundary"
INCONCLUSIVE = "inconclusive"


@dataclass
class BoundsReport:
    eps_max_sq: float
    eps_tilde_max_sq: float
    ijnr_value: float
    argmin_c: dict
    verdicts: dict
    search_meta: dict
    notes: list = field(default_factory=list)


def _degenerate(spec: QuadraticMapSpec) -> SearchResult:
    return SearchResult(0.0, null_direction(spec), 0, {"origin_regular": False})


def eps_max(spec: QuadraticMapSpec, search: SearchOptions | None = None) -> SearchResult:
    """eps_max^2: minimum over |c| = 1 of the lambda_m-shifted pseudo-resolvent."""
    search = search or SearchOptions()
    if not is_regular(spec):
        return _degenerate(spec)
    return minimize_resolvent(spec, "lambda_m", search)


def eps_tilde_max(spec: QuadraticMapSpec, search: SearchOptions | None = None) -> SearchResult:
    """eps_tilde_max^2: lambda_min shift, restricted to C = {c : lambda_min(c.A) <= 0}."""
    search = search or SearchOptions()
    if not is_regular(spec):
        return _degenerate(spec)
    return minimize_resolvent(spec, "lambda_min", search, restrict=True)


def ijnr_verdict(value: float, n: int, m: int, is_complex: bool, tol: float = TOL_VERDICT) -> str:
    dim = 2 * n if is_complex else n
    if dim == m and value >= 1 - tol:
        return EMPTY_SHELL
    if abs(value - 1) <= tol:
        return STRICTLY_CONVEX
    if value > 1 + tol and dim > m:
        return STRONGLY_CONVEX
    return INCONCLUSIVE


def ijnr_check(spec: QuadraticMapSpec, search: SearchOptions | None = None):
    """Return (value, verdict, search result) for the unit-sphere image F(A, v).

    value is the square root of the minimized lambda_min-shifted
    pseudo-resolvent; > 1 is sufficient (not necessary) for convexity.
    """
    search = search or SearchOptions()
    if not is_regular(spec):
        res = _degenerate(spec)
    else:
        res = minimize_resolvent(spec, "lambda_min", search)
    value = math.sqrt(res.value) if math.isfinite(res.value) else math.inf
    return value, ijnr_verdict(value, spec.n, spec.m, spec.is_complex), res


def _radius_verdict(res: SearchResult) -> str:
    if res.meta.get("origin_regular") is False:
        return NOT_REGULAR
    if math.isinf(res.value):
        return "unbounded"
    return "finite"


def compute_bounds(spec: QuadraticMapSpec, search: SearchOptions | None = None) -> BoundsReport:
    search = search or SearchOptions()
    emax = eps_max(spec, search)
    etil = eps_tilde_max(spec, search)
    value, verdict, ij = ijnr_check(spec, search)

    tilde_verdict = _radius_verdict(etil)
    if tilde_verdict == "unbounded" and etil.c is None:
        tilde_verdict = "C-empty"
    notes = [
        "bottom-eigenspace projections below tol_null * |c.v|^2 are treated as zero",
    ]
    if (2 * spec.n if spec.is_complex else spec.n) == spec.m:
        notes.append("n = m (2n = m complex): the image of the sphere is an empty shell")
    if spec.m >= 3:
        notes.append("m >= 3: sphere minimum is a heuristic upper bound (sampling + local refinement)")
    notes.extend(spec.warnings)

    def meta(res: SearchResult) -> dict:
        return {"evaluations": res.evaluations, **res.meta}

    return BoundsReport(
        eps_max_sq=emax.value,
        eps_tilde_max_sq=etil.value,
        ijnr_value=value,
        argmin_c={
            "eps_max": emax.c,
            "eps_tilde_max": etil.c,
            "ijnr": ij.c,
        },
        verdicts={
            "eps_max": _radius_verdict(emax),
            "eps_tilde_max": tilde_verdict,
            "ijnr": verdict,
        },
        search_meta={
            **search.as_dict(spec.m),
            "tol_verdict": TOL_VERDICT,
            "eps_max": meta(emax),
            "eps_tilde_max": meta(etil),
            "ijnr": meta(ij),
        },
        notes=notes,
    )
