"""Quadratic map instances f_i(x) = x*A_i x - v_i*x - x*v_i.

An instance holds an m-tuple of symmetric (real) or Hermitian (complex)
n x n matrices together with m vectors of length n.  Internally matrices
are stacked into an ``(m, n, n)`` array and vectors into ``(m, n)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import InvalidInputError

FIELDS = ("real", "complex")

# relative threshold on the asymmetric part before a warning is recorded
TOL_SYM = 1e-12
TOL_PSD = 1e-12


@dataclass(frozen=True, eq=False)
class QuadraticMapSpec:
    field: str
    A: np.ndarray
    v: np.ndarray
    warnings: tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def is_complex(self) -> bool:
        return self.field == "complex"

    @property
    def real_dim(self) -> int:
        """Real dimension of the domain (n, or 2n over the complex field)."""
        return 2 * self.n if self.is_complex else self.n

    def combine(self, c) -> tuple[np.ndarray, np.ndarray]:
        """Return (c.A, c.v) for a real dual vector c."""
        c = np.asarray(c, dtype=float)
        return np.tensordot(c, self.A, axes=1), c @ self.v

    def scaled(self, a_scale: float = 1.0, v_scale: float = 1.0) -> "QuadraticMapSpec":
        return QuadraticMapSpec(self.field, self.A * a_scale, self.v * v_scale, self.warnings)

    def transformed(self, U: np.ndarray) -> "QuadraticMapSpec":
        """Change of variables x -> U x for unitary U: A_i -> U*A_iU, v_i -> U*v_i."""
        Uh = U.conj().T
        A = np.einsum("ij,mjk,kl->mil", Uh, self.A, U)
        v = self.v @ U.conj()
        return QuadraticMapSpec(self.field, A, v, self.warnings)


def _as_array(obj: Any, is_complex: bool, what: str) -> np.ndarray:
    dtype = complex if is_complex else float
    try:
        arr = np.asarray(obj, dtype=dtype)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{what}: cannot convert to a numeric array ({exc})") from None
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{what}: non-finite entry")
    return arr


def validate_and_symmetrize(field: str, A: Sequence, v: Sequence) -> QuadraticMapSpec:
    """Build a validated instance, replacing each A_i by (A_i + A_i*)/2."""
    if field not in FIELDS:
        raise InvalidInputError(f"field must be one of {FIELDS}, got {field!r}")
    is_complex = field == "complex"
    A = _as_array(A, is_complex, "A")
    v = _as_array(v, is_complex, "v")
    if A.ndim != 3 or A.shape[0] < 1:
        raise InvalidInputError(f"A must be a non-empty list of square matrices, got shape {A.shape}")
    m, n, n2 = A.shape
    if n < 1 or n != n2:
        raise InvalidInputError(f"A matrices must be square n x n with n >= 1, got {n} x {n2}")
    if v.ndim != 2 or v.shape != (m, n):
        raise InvalidInputError(f"v must hold m={m} vectors of length n={n}, got shape {v.shape}")

    At = np.conj(np.swapaxes(A, 1, 2))
    asym = float(np.max(np.abs(A - At))) / 2
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    warnings = []
    if asym > TOL_SYM * scale:
        warnings.append(f"input matrices were not symmetric (max asymmetric part {asym:.3e}); symmetrized")
    A = (A + At) / 2
    return QuadraticMapSpec(field, A, v, tuple(warnings))


def from_dict(data: dict) -> QuadraticMapSpec:
    """Parse the JSON instance schema (complex entries as [re, im] pairs)."""
    if not isinstance(data, dict):
        raise InvalidInputError("instance must be a JSON object")
    missing = [k for k in ("field", "n", "m", "A", "v") if k not in data]
    if missing:
        raise InvalidInputError(f"instance missing keys: {', '.join(missing)}")
    fld = data["field"]
    if fld not in FIELDS:
        raise InvalidInputError(f"field must be one of {FIELDS}, got {fld!r}")
    A, v = data["A"], data["v"]
    if fld == "complex":
        try:
            A = np.asarray(A, dtype=float)
            v = np.asarray(v, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"complex entries must be [re, im] pairs ({exc})") from None
        if A.ndim != 4 or A.shape[-1] != 2 or v.ndim != 3 or v.shape[-1] != 2:
            raise InvalidInputError("complex entries must be [re, im] pairs")
        A = A[..., 0] + 1j * A[..., 1]
        v = v[..., 0] + 1j * v[..., 1]
    spec = validate_and_symmetrize(fld, A, v)
    if not isinstance(data["n"], int) or not isinstance(data["m"], int):
        raise InvalidInputError("n and m must be integers")
    if (data["n"], data["m"]) != (spec.n, spec.m):
        raise InvalidInputError(
            f"declared n={data['n']}, m={data['m']} do not match data (n={spec.n}, m={spec.m})"
        )
    return spec


def to_dict(spec: QuadraticMapSpec) -> dict:
    def enc(arr):
        if spec.is_complex:
            return np.stack([arr.real, arr.imag], axis=-1).tolist()
        return arr.real.tolist()

    return {"field": spec.field, "n": spec.n, "m": spec.m, "A": enc(spec.A), "v": enc(spec.v)}


def eval_map(spec: QuadraticMapSpec, x) -> np.ndarray:
    """Evaluate y_i = x*A_i x - 2 Re(v_i* x)."""
    x = np.asarray(x, dtype=complex if spec.is_complex else float)
    if x.shape != (spec.n,):
        raise InvalidInputError(f"x must have length {spec.n}, got shape {x.shape}")
    quad = np.einsum("i,mij,j->m", x.conj(), spec.A, x)
    lin = spec.v.conj() @ x
    return np.real(quad) - 2 * np.real(lin)


def eval_map_batch(spec: QuadraticMapSpec, X: np.ndarray) -> np.ndarray:
    """Row-wise eval_map for X of shape (k, n); returns (k, m)."""
    quad = np.einsum("ki,mij,kj->km", X.conj(), spec.A, X)
    lin = X @ spec.v.conj().T
    return np.real(quad) - 2 * np.real(lin)


def gram_matrix(spec: QuadraticMapSpec) -> np.ndarray:
    """g_ij = Re(v_i* v_j), so that |c.v|^2 = c^T g c."""
    g = np.real(spec.v.conj() @ spec.v.T)
    return (g + g.T) / 2


def is_regular(spec: QuadraticMapSpec, tol: float = TOL_PSD) -> bool:
    """True when the stacked v has rank m (the origin is a regular point)."""
    g = gram_matrix(spec)
    tr = float(np.trace(g))
    return tr > 0 and float(np.linalg.eigvalsh(g)[0]) > tol * tr


def null_direction(spec: QuadraticMapSpec) -> np.ndarray:
    """Unit c minimizing |c.v| (bottom eigenvector of the Gram matrix, largest entry positive)."""
    _, V = np.linalg.eigh(gram_matrix(spec))
    c = V[:, 0]
    return c if c[np.argmax(np.abs(c))] > 0 else -c
