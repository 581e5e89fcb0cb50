"""Tests for the stride-2 discrete derivatives"""
import numpy as np
import pytest

from dqw_geom.calculus import d_j, d_p, d_pp, dj, dp, dpp, reconstruct
from dqw_geom.errors import FieldRangeError
from dqw_geom.lattice import make_lattice, scalar_field, spinor_field


def _field(values):
    values = np.asarray(values, dtype=float)
    return scalar_field(make_lattice(values.shape[1], values.shape[0], 0.1), values)


class TestTimeDerivative:
    """Tests for D_j"""

    def test_constant(self):
        f = d_j(_field(np.full((6, 8), 3.0)))
        assert f.valid == 4
        np.testing.assert_array_equal(f.data, 0.0)

    def test_linear(self):
        j = np.arange(6)[:, None] * np.ones((1, 8))
        np.testing.assert_array_equal(d_j(_field(j)).data, 1.0)

    def test_quadratic(self):
        j = np.arange(7)[:, None] * np.ones((1, 8))
        expected = (2 * np.arange(5) + 2)[:, None] * np.ones((1, 8))
        np.testing.assert_array_equal(d_j(_field(j ** 2)).data, expected)

    def test_needs_three_slices(self):
        with pytest.raises(FieldRangeError):
            dj(np.zeros((2, 8)))


class TestSpaceDerivatives:
    """Tests for D_p and D_pp"""

    def test_constant(self):
        f = _field(np.full((3, 8), 2.0))
        np.testing.assert_array_equal(d_p(f).data, 0.0)
        np.testing.assert_array_equal(d_pp(f).data, 0.0)

    def test_cosine(self):
        P = 8
        p = np.arange(P)
        f = np.cos(2 * np.pi * p / P)[None, :]
        expected = -0.5 * np.sin(4 * np.pi / P) * np.sin(2 * np.pi * p / P)
        np.testing.assert_allclose(dp(f)[0], expected, atol=1e-14)

    def test_alternating_is_invisible(self):
        f = ((-1.0) ** np.arange(8))[None, :] * np.ones((3, 1))
        np.testing.assert_array_equal(dp(f), 0.0)
        np.testing.assert_array_equal(dpp(f), 0.0)

    def test_matrix_entries_carried(self, rng):
        m = rng.normal(size=(3, 8, 2, 2))
        np.testing.assert_allclose(dp(m)[..., 1, 0], dp(m[..., 1, 0]))

    def test_spinor_field_keeps_basis(self):
        lat = make_lattice(8, 4, 0.1)
        psi = spinor_field(lat, np.ones(lat.shape + (2,)))
        out = d_j(psi)
        assert out.basis is psi.basis
        assert out.valid == 2


class TestAlgebra:
    """Tests for linearity and commuting derivatives"""

    @pytest.mark.parametrize('op', [dj, dp, dpp])
    def test_linear(self, rng, op):
        f = rng.randint(-50, 50, size=(9, 12)).astype(float)
        g = rng.randint(-50, 50, size=(9, 12)).astype(float)
        np.testing.assert_array_equal(op(2 * f + 3 * g), 2 * op(f) + 3 * op(g))

    def test_time_and_space_commute(self, rng):
        f = rng.randint(-50, 50, size=(9, 12)).astype(float)
        np.testing.assert_array_equal(dj(dp(f)), dp(dj(f)))
        np.testing.assert_array_equal(dj(dpp(f)), dpp(dj(f)))

    def test_field_operators_commute(self, rng):
        f = _field(rng.randint(-50, 50, size=(9, 12)))
        np.testing.assert_array_equal(d_j(d_p(f)).data, d_p(d_j(f)).data)


class TestReconstruct:
    """Tests for inverting the stencils"""

    def test_random_field(self, rng):
        values = rng.normal(size=(6, 10))
        f = _field(values)
        forward, ahead, behind = reconstruct(f, d_j(f), d_p(f), d_pp(f))
        np.testing.assert_allclose(forward, values[2:], atol=1e-14)
        np.testing.assert_allclose(ahead, np.roll(values, -2, axis=1), atol=1e-14)
        np.testing.assert_allclose(behind, np.roll(values, 2, axis=1), atol=1e-14)

    def test_constant(self):
        f = _field(np.full((4, 8), 1.5))
        for part in reconstruct(f, d_j(f), d_p(f), d_pp(f)):
            np.testing.assert_array_equal(part, 1.5)

    def test_parity_class_ramp(self):
        values = np.tile(np.array([0.0, 7.0, 2.0, 7.0, 4.0, 7.0, 6.0, 7.0, 8.0, 7.0, 10.0, 7.0]), (3, 1))
        f = _field(values)
        _, ahead, behind = reconstruct(f, d_j(f), d_p(f), d_pp(f))
        assert ahead[0, 4] == pytest.approx(6.0)
        assert behind[0, 4] == pytest.approx(2.0)
