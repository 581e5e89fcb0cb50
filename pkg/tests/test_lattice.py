"""Tests for lattice bookkeeping and field containers

Tests cover:
1. Lattice validation
2. Periodic wrapping
3. Field validity ranges and read-only storage
4. Basis tags on spinor fields
"""
import numpy as np
import pytest

from dqw_geom.errors import BasisMismatchError, FieldRangeError, LatticeError
from dqw_geom.lattice import (
    SIGMA3,
    Basis,
    LocalMatrix,
    det2,
    from_data,
    inv2,
    make_lattice,
    matrix_field,
    scalar_field,
    spinor_field,
    trim,
    wrap_p,
)


class TestMakeLattice:
    """Tests for lattice construction"""

    def test_minimal_lattice(self):
        lat = make_lattice(8, 4, 0.1)
        assert lat.shape == (4, 8)
        assert lat.t[-1] == pytest.approx(0.3)
        assert lat.x[3] == pytest.approx(0.3)

    def test_odd_P_rejected(self):
        with pytest.raises(LatticeError, match='P must be even'):
            make_lattice(7, 4, 0.1)

    def test_short_J_rejected(self):
        with pytest.raises(LatticeError, match='J too small'):
            make_lattice(8, 2, 0.1)

    def test_bad_eps_rejected(self):
        with pytest.raises(LatticeError):
            make_lattice(8, 4, 0.0)
        with pytest.raises(LatticeError):
            make_lattice(8, 4, float('inf'))

    def test_lattice_error_is_value_error(self):
        with pytest.raises(ValueError):
            make_lattice(2, 4, 0.1)


class TestWrap:
    """Tests for periodic site indices"""

    @pytest.mark.parametrize('p, expected', [(-1, 7), (9, 1), (3, 3)])
    def test_wrap(self, p, expected):
        assert wrap_p(p, 8) == expected

    @pytest.mark.parametrize('P', [2, 8, 30])
    def test_periodic(self, P):
        for p in range(-P, 2 * P):
            assert wrap_p(p + P, P) == wrap_p(p, P)
            assert 0 <= wrap_p(p, P) < P

    def test_keeps_parity(self):
        for p in range(-8, 8):
            assert wrap_p(p, 8) % 2 == p % 2


class TestField:
    """Tests for Field validity and storage"""

    def test_values_are_read_only(self):
        lat = make_lattice(8, 4, 0.1)
        f = scalar_field(lat, np.zeros(lat.shape))
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0

    def test_out_of_range_slice(self):
        lat = make_lattice(8, 5, 0.1)
        f = from_data(np.ones((3, 8)), lat.J)
        assert f.valid == 3
        assert f.J == 5
        assert np.isnan(f.values[3:]).all()
        assert f.at(2, 7) == 1.0
        with pytest.raises(FieldRangeError):
            f.at(3, 0)

    def test_matrix_site_is_local_matrix(self):
        lat = make_lattice(8, 4, 0.1)
        f = matrix_field(lat, np.broadcast_to(SIGMA3, lat.shape + (2, 2)))
        site = f.at(1, 2)
        assert isinstance(site, LocalMatrix)
        assert site.site == (1, 2)
        np.testing.assert_array_equal(site.entries, SIGMA3)

    def test_shape_mismatch(self):
        lat = make_lattice(8, 4, 0.1)
        with pytest.raises(FieldRangeError):
            scalar_field(lat, np.zeros((4, 6)))

    def test_trim(self):
        a, b = trim(np.zeros((5, 2)), np.ones((3, 2)))
        assert a.shape == (3, 2) and b.shape == (3, 2)


class TestSpinorField:
    """Tests for basis tags"""

    def test_combine_same_basis(self):
        lat = make_lattice(8, 4, 0.1)
        a = spinor_field(lat, np.ones(lat.shape + (2,)))
        b = spinor_field(lat, np.ones(lat.shape + (2,)), valid=2)
        total = a + b
        assert total.valid == 2
        np.testing.assert_array_equal(total.data, 2 * np.ones((2, 8, 2)))

    def test_mixed_bases_rejected(self):
        lat = make_lattice(8, 4, 0.1)
        a = spinor_field(lat, np.ones(lat.shape + (2,)))
        b = spinor_field(lat, np.ones(lat.shape + (2,)), basis=Basis.DIAGONAL)
        with pytest.raises(BasisMismatchError):
            a - b


class TestMatrixAlgebra:
    """Tests for the vectorized 2x2 helpers"""

    def test_inverse(self, rng):
        m = rng.normal(size=(6, 2, 2)) + 1j * rng.normal(size=(6, 2, 2))
        np.testing.assert_allclose(inv2(m) @ m, np.broadcast_to(np.eye(2), m.shape), atol=1e-12)
        np.testing.assert_allclose(det2(m), np.linalg.det(m), atol=1e-12)
