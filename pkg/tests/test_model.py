import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qconvex.errors import InvalidInputError
from qconvex.model import (
    eval_map,
    eval_map_batch,
    from_dict,
    gram_matrix,
    is_regular,
    null_direction,
    to_dict,
    validate_and_symmetrize,
)

from conftest import make, random_spec


class TestValidate:
    def test_symmetrizes(self):
        s = make([[[0.0, 2.0], [0.0, 0.0]]], [[1.0, 0.0]])
        np.testing.assert_array_equal(s.A[0], [[0, 1], [1, 0]])
        assert s.warnings

    def test_symmetric_unchanged(self):
        A = np.array([[[2.0, 1.0], [1.0, -3.0]]])
        s = make(A, [[1.0, 0.0]])
        np.testing.assert_array_equal(s.A, A)
        assert s.warnings == ()

    def test_hermitian_part(self):
        A = np.array([[[1.0, 1j], [0.0, 2.0]]])
        s = make(A, [[1.0, 0.0]], field="complex")
        np.testing.assert_allclose(s.A[0], s.A[0].conj().T)
        assert s.A[0, 0, 1] == pytest.approx(0.5j)

    @pytest.mark.parametrize(
        "A, v",
        [
            (np.zeros((0, 2, 2)), np.zeros((0, 2))),
            (np.zeros((1, 2, 3)), np.zeros((1, 2))),
            (np.zeros((1, 2, 2)), np.zeros((1, 3))),
            (np.zeros((2, 2, 2)), np.zeros((1, 2))),
            ([[[np.nan]]], [[1.0]]),
        ],
    )
    def test_rejects(self, A, v):
        with pytest.raises(InvalidInputError):
            validate_and_symmetrize("real", A, v)

    def test_bad_field(self):
        with pytest.raises(InvalidInputError):
            validate_and_symmetrize("quaternion", [[[1.0]]], [[1.0]])


class TestJson:
    def test_round_trip_real(self, rng):
        s = random_spec(rng, 3, 2)
        t = from_dict(json.loads(json.dumps(to_dict(s))))
        np.testing.assert_array_equal(s.A, t.A)
        np.testing.assert_array_equal(s.v, t.v)

    def test_round_trip_complex(self, rng):
        s = random_spec(rng, 2, 3, "complex")
        t = from_dict(json.loads(json.dumps(to_dict(s))))
        assert t.is_complex
        np.testing.assert_array_equal(s.A, t.A)
        np.testing.assert_array_equal(s.v, t.v)

    def test_declared_dims_checked(self):
        with pytest.raises(InvalidInputError, match="declared"):
            from_dict({"field": "real", "n": 2, "m": 1, "A": [[[1.0]]], "v": [[1.0]]})

    def test_missing_keys(self):
        with pytest.raises(InvalidInputError, match="missing"):
            from_dict({"field": "real"})

    def test_complex_needs_pairs(self):
        with pytest.raises(InvalidInputError):
            from_dict({"field": "complex", "n": 1, "m": 1, "A": [[[1.0]]], "v": [[1.0]]})


class TestEval:
    def test_scalar(self, scalar):
        assert eval_map(scalar, [2.0])[0] == 0.0

    def test_saddle(self, saddle):
        assert eval_map(saddle, [1.0, 1.0])[0] == -2.0

    def test_origin(self, rng):
        s = random_spec(rng, 4, 3, "complex")
        np.testing.assert_array_equal(eval_map(s, np.zeros(4)), 0.0)

    def test_wrong_length(self, scalar):
        with pytest.raises(InvalidInputError):
            eval_map(scalar, [1.0, 2.0])

    def test_batch_matches(self, rng):
        s = random_spec(rng, 3, 2, "complex")
        X = rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3))
        np.testing.assert_allclose(eval_map_batch(s, X), [eval_map(s, x) for x in X], atol=1e-12)

    def test_symmetrization_invariant(self, rng):
        A = rng.normal(size=(2, 3, 3))
        v = rng.normal(size=(2, 3))
        x = rng.normal(size=3)
        raw = np.einsum("i,mij,j->m", x, A, x) - 2 * v @ x
        np.testing.assert_allclose(eval_map(make(A, v), x), raw, atol=1e-12)

    def test_hermitian_forms_real(self, rng):
        s = random_spec(rng, 4, 2, "complex")
        x = rng.normal(size=4) + 1j * rng.normal(size=4)
        q = np.einsum("i,mij,j->m", x.conj(), s.A, x)
        assert np.max(np.abs(q.imag)) < 1e-12 * np.max(np.abs(q))


class TestGram:
    def test_orthonormal(self, spike):
        np.testing.assert_array_equal(gram_matrix(spike), np.eye(2))

    def test_single(self, saddle):
        np.testing.assert_array_equal(gram_matrix(saddle), [[1.0]])

    def test_singular(self):
        s = make(np.zeros((2, 2, 2)), [[1.0, 0.0], [1.0, 0.0]])
        np.testing.assert_array_equal(gram_matrix(s), [[1, 1], [1, 1]])
        assert not is_regular(s)
        c = null_direction(s)
        np.testing.assert_allclose(np.abs(c), [2**-0.5, 2**-0.5])
        assert abs(c @ s.v @ [1, 0]) < 1e-15

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.integers(1, 5), st.booleans(), st.integers(0, 2**32 - 1))
    def test_psd(self, n, m, cplx, seed):
        s = random_spec(np.random.default_rng(seed), n, m, "complex" if cplx else "real")
        g = gram_matrix(s)
        assert np.linalg.eigvalsh(g)[0] >= -1e-12 * max(1.0, np.trace(g))
