import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qconvex.errors import InvalidInputError
from qconvex.model import eval_map
from qconvex.secular import (
    secular_min,
    stationary_multipliers,
    stationary_value,
    support_point,
    support_value,
)
from qconvex.spectral import spectral_data

from conftest import make, random_spec
from oracles import sphere_min_oracle


class TestExamples:
    def test_scalar_unit_sphere(self, scalar):
        sol = secular_min(spectral_data(scalar, [1.0]), 1.0)
        assert sol.lambda_star == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(sol.x, [1.0])
        assert sol.F_value == pytest.approx(-1.0)
        assert not sol.hard_case

    def test_scalar_radius_two(self, scalar):
        sol = secular_min(spectral_data(scalar, [1.0]), 4.0)
        assert sol.lambda_star == pytest.approx(0.5, abs=1e-12)
        np.testing.assert_allclose(sol.x, [2.0])
        assert sol.F_value == pytest.approx(0.0, abs=1e-12)

    def test_hard_case(self, saddle):
        sol = secular_min(spectral_data(saddle, [1.0]), 1.0)
        assert sol.hard_case
        assert sol.lambda_star == -1.0
        np.testing.assert_allclose(sol.x, [0.5, math.sqrt(3) / 2], atol=1e-14)
        assert sol.F_value == pytest.approx(-1.5)
        assert sol.unique is False

    @pytest.mark.parametrize("z", [0.25, 0.5, 3.0])
    def test_hard_case_threshold(self, saddle, z):
        sol = secular_min(spectral_data(saddle, [1.0]), z)
        assert sol.hard_case and sol.lambda_star == -1.0

    def test_support_values(self, scalar, saddle):
        assert support_value(spectral_data(scalar, [1.0]), 1.0) == pytest.approx(-1.0)
        assert support_value(spectral_data(scalar, [1.0]), 4.0) == pytest.approx(0.0, abs=1e-12)
        assert support_value(spectral_data(saddle, [1.0]), 1.0) == pytest.approx(-1.5)

    def test_support_point_scalar(self, scalar):
        x, y, _ = support_point(scalar, [1.0], 1.0)
        np.testing.assert_allclose(x, [1.0])
        np.testing.assert_allclose(y, [-1.0])

    def test_support_point_regular(self, saddle):
        x, y, sol = support_point(saddle, [1.0], 1 / 16)
        assert not sol.hard_case
        assert sol.lambda_star == pytest.approx(-3.0, abs=1e-12)
        np.testing.assert_allclose(x, [0.25, 0.0], atol=1e-14)
        np.testing.assert_allclose(y, [-7 / 16], atol=1e-14)

    def test_degenerate_map(self):
        s = make([np.zeros((2, 2))], [[0.0, 0.0]])
        sol = secular_min(spectral_data(s, [1.0]), 1.0)
        assert sol.unique is False
        assert np.linalg.norm(sol.x) == pytest.approx(1.0)

    @pytest.mark.parametrize("z", [0.0, -1.0])
    def test_nonpositive_z(self, scalar, z):
        with pytest.raises(InvalidInputError):
            secular_min(spectral_data(scalar, [1.0]), z)


def _triple(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    m = int(rng.integers(1, 4))
    spec = random_spec(rng, n, m)
    c = rng.normal(size=m)
    c /= np.linalg.norm(c)
    z = float(np.exp(rng.uniform(np.log(0.05), np.log(5.0))))
    return spec, c, z


class TestProperties:
    @pytest.mark.parametrize("seed", range(12))
    def test_oracle_equivalence(self, seed):
        spec, c, z = _triple(seed)
        F = support_value(spectral_data(spec, c), z)
        assert F == pytest.approx(sphere_min_oracle(spec, c, z), abs=1e-5)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_point_on_sphere_and_attains_value(self, seed):
        spec, c, z = _triple(seed)
        x, y, sol = support_point(spec, c, z)
        assert float(np.vdot(x, x).real) == pytest.approx(z, rel=1e-10)
        assert float(c @ y) == pytest.approx(sol.F_value, abs=1e-9 * max(1.0, abs(sol.F_value)))
        np.testing.assert_allclose(y, eval_map(spec, x))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_derivative_is_multiplier(self, seed):
        spec, c, z = _triple(seed)
        sd = spectral_data(spec, c)
        h = 1e-5
        fd = (support_value(sd, z + h) - support_value(sd, z - h)) / (2 * h)
        assert fd == pytest.approx(secular_min(sd, z).lambda_star, abs=1e-4)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_multiplier_monotone(self, seed):
        spec, c, _ = _triple(seed)
        sd = spectral_data(spec, c)
        lams = [secular_min(sd, z).lambda_star for z in np.geomspace(0.01, 100, 25)]
        assert np.all(np.diff(lams) >= -1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_larger_root_larger_value(self, seed):
        spec, c, z = _triple(seed)
        sd = spectral_data(spec, c)
        roots = stationary_multipliers(sd, z)
        vals = [stationary_value(sd, r, z) for r in roots]
        assert np.all(np.diff(vals) > -1e-9 * max(1.0, max(abs(v) for v in vals)))
        sol = secular_min(sd, z)
        if not sol.hard_case:
            assert roots[0] == pytest.approx(sol.lambda_star, abs=1e-9 * max(1.0, abs(roots[0])))
