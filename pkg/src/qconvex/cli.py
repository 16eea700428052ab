"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import compute_bounds, ijnr_check
from .errors import InvalidInputError, NumericalFailure
from .estimates import L_ESTIMATORS, estimate_report
from .lipschitz import lipschitz_report
from .model import from_dict
from .search import SearchOptions
from .spectral import TOL_CLUSTER, TOL_NULL
from .verify import TAU_AUDIT, convexity_audit, sample_boundary, write_boundary_csv

COMMANDS = ("bounds", "ijnr", "lipschitz", "estimates", "boundary", "verify")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidInputError(message)


def to_jsonable(obj):
    """Recursively convert reports to JSON types; non-finite floats become strings."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    return obj


def dumps(report: dict) -> str:
    # json emits the shortest repr that round-trips exactly
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qconvex", description="Convexity radii for images of balls under quadratic maps.")
    p.add_argument("--version", action="version", version=f"qconvex {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--input", required=True, help="instance JSON file ('-' for stdin)")
        s.add_argument("--epsilon", type=float, help="ball radius (boundary, verify)")
        s.add_argument("--directions", type=int, default=360, help="boundary directions (default 360)")
        s.add_argument("--samples", type=int, default=2000, help="image / Lipschitz samples (default 2000)")
        s.add_argument("--grid-density", type=int, default=None, help="dual grid size for sphere searches")
        s.add_argument("--seed", type=int, default=42)
        s.add_argument("--tol-cluster", type=float, default=TOL_CLUSTER)
        s.add_argument("--tol-null", type=float, default=TOL_NULL)
        s.add_argument("--estimator", choices=L_ESTIMATORS, default="min", help="L upper bound for estimates")
        s.add_argument("--out", default=None, help="output file (default stdout)")
        s.add_argument("--format", choices=("json", "csv"), default=None)
    return p


def _load(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"malformed JSON at line {exc.lineno} column {exc.colno} (char {exc.pos}): {exc.msg}") from None
    return from_dict(data)


def _need_eps(args) -> float:
    if args.epsilon is None:
        raise InvalidInputError(f"{args.command} requires --epsilon")
    if not (args.epsilon > 0 and math.isfinite(args.epsilon)):
        raise InvalidInputError(f"--epsilon must be positive and finite, got {args.epsilon}")
    return args.epsilon


def run(args) -> str:
    """Execute a parsed command and return the report text."""
    fmt = args.format or ("csv" if args.command == "boundary" else "json")
    if fmt == "csv" and args.command != "boundary":
        raise InvalidInputError("--format csv is only available for the boundary command")
    if args.tol_cluster <= 0 or args.tol_null < 0:
        raise InvalidInputError("tolerances must be positive")
    if args.grid_density is not None and args.grid_density < 8:
        raise InvalidInputError("--grid-density must be at least 8")
    if args.samples < 0:
        raise InvalidInputError("--samples must be non-negative")

    spec = _load(args.input)
    search = SearchOptions(
        grid_density=args.grid_density, seed=args.seed, tol_cluster=args.tol_cluster, tol_null=args.tol_null
    )
    header = {
        "command": args.command,
        "version": __version__,
        "seed": args.seed,
        "instance": {"field": spec.field, "n": spec.n, "m": spec.m},
        "tolerances": {"tol_cluster": args.tol_cluster, "tol_null": args.tol_null},
        "grid": search.as_dict(spec.m),
        "warnings": list(spec.warnings),
    }

    if args.command == "bounds":
        body = compute_bounds(spec, search)
    elif args.command == "ijnr":
        value, verdict, res = ijnr_check(spec, search)
        body = {"ijnr_value": value, "verdict": verdict, "argmin_c": res.c,
                "evaluations": res.evaluations, "search_meta": res.meta}
    elif args.command == "lipschitz":
        if args.samples < 1:
            raise InvalidInputError("--samples must be at least 1 for lipschitz")
        rep = lipschitz_report(spec, samples=args.samples, seed=args.seed)
        body = {**to_jsonable(rep), "best_upper": rep.best_upper}
    elif args.command == "estimates":
        body = estimate_report(spec, search, args.estimator)
    elif args.command == "boundary":
        eps = _need_eps(args)
        b = sample_boundary(spec, eps, args.directions, args.seed, args.tol_cluster, args.tol_null)
        if fmt == "csv":
            buf = io.StringIO()
            write_boundary_csv(spec, b, buf)
            return buf.getvalue()
        body = {"eps": eps, "c": b.c, "x": b.x, "y": b.y, "lambda": b.lam, "hard_case": b.hard_case,
                "support": b.support}
    else:
        eps = _need_eps(args)
        body = convexity_audit(spec, eps, args.directions, args.samples, args.seed, args.tol_cluster, args.tol_null)
        header["tolerances"]["tau_audit_rel"] = TAU_AUDIT

    return dumps({**header, "report": body})


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text = run(args)
    except InvalidInputError as exc:
        print(f"qconvex: invalid input: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"qconvex: numerical failure: {exc}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
