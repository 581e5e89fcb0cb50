"""Tests for the discrete geometry of the two-step walk

Tests cover:
1. Two-step coefficients against the composed walk
2. Eigenvalues, 2-bein and metric (flat, time-only and numeric cases)
3. Diagonalizing basis and its phase convention
4. Degenerate sites, masked or raised
"""
import logging

import numpy as np
import pytest

from dqw_geom.errors import DegenerateSiteError
from dqw_geom.geometry import (
    DegenerateFlag,
    build_geometry,
    diagonalizing_basis,
    eigenvalues,
    local_L,
    local_W,
    two_step_coefficients,
    weighted_inner,
    zweibein_and_metric,
)
from dqw_geom.lattice import SIGMA1, SIGMA3, LocalMatrix, make_lattice, scalar_field
from dqw_geom.theta import parse_theta
from dqw_geom.walk import inner, random_state, two_step


def _probe_theta(c_left, c_right, c_next):
    """θ field on P=8 with the given cosines around site (j=0, p=2)."""
    lat = make_lattice(8, 3, 0.1)
    values = np.zeros(lat.shape)
    values[0, 1] = np.arccos(c_left)
    values[0, 3] = np.arccos(c_right)
    values[1, 2] = np.arccos(c_next)
    return lat, scalar_field(lat, values)


class TestTwoStepCoefficients:
    """Tests for M₊, M₀, M₋ and the operators W, L, Wσ₃"""

    def test_flat(self):
        lat = make_lattice(8, 4, 0.1)
        m_plus, m_zero, m_minus = two_step_coefficients(parse_theta('0'), lat, 1, 3)
        np.testing.assert_array_equal(m_plus.entries, np.diag([1, 0]))
        np.testing.assert_array_equal(m_minus.entries, np.diag([0, 1]))
        np.testing.assert_array_equal(m_zero.entries, np.zeros((2, 2)))
        np.testing.assert_array_equal(local_W(parse_theta('0'), lat, 1, 3).entries, np.eye(2))
        np.testing.assert_array_equal(local_L(parse_theta('0'), lat, 1, 3).entries, np.zeros((2, 2)))

    def test_reproduces_two_step(self, random_theta_field):
        lat, theta = random_theta_field
        geometry = build_geometry(theta, lat)
        psi = random_state(lat, seed=21).values
        j = 3
        out = two_step(psi, theta, lat, j=j).values
        m_plus, m_zero, m_minus = (m.data[j] for m in (geometry.m_plus, geometry.m_zero, geometry.m_minus))
        expected = (np.einsum('pab,pb->pa', m_plus, np.roll(psi, -2, axis=0))
                    + np.einsum('pab,pb->pa', m_zero, psi)
                    + np.einsum('pab,pb->pa', m_minus, np.roll(psi, 2, axis=0)))
        np.testing.assert_allclose(out, expected, atol=1e-14)

    def test_operator_identities(self, random_theta_field):
        lat, theta = random_theta_field
        g = build_geometry(theta, lat)
        np.testing.assert_array_equal(g.W.data, g.m_plus.data + g.m_minus.data)
        np.testing.assert_array_equal(g.L.data, g.m_zero.data)
        np.testing.assert_array_equal(g.wsigma3.data, g.m_plus.data - g.m_minus.data)
        np.testing.assert_allclose(g.W.data @ SIGMA3, g.wsigma3.data, atol=1e-15)

    def test_site_matches_field(self, random_theta_field):
        lat, theta = random_theta_field
        g = build_geometry(theta, lat)
        np.testing.assert_allclose(local_W(theta, lat, 2, 15).entries, g.W.data[2, 15], atol=1e-15)
        np.testing.assert_allclose(local_L(theta, lat, 2, 0).entries, g.L.data[2, 0], atol=1e-15)

    def test_time_only_closed_forms(self, example_theta, example_lattice):
        g = build_geometry(example_theta, example_lattice)
        theta = g.theta.data[:, 0]
        c, s = np.cos(theta), np.sin(theta)
        j = 5
        W = c[j] * np.array([[c[j + 1], 1j * s[j + 1]], [1j * s[j + 1], c[j + 1]]])
        L = s[j] * np.array([[s[j + 1], -1j * c[j + 1]], [-1j * c[j + 1], s[j + 1]]])
        delta = theta[j + 1] - theta[j]
        WL = np.array([[np.cos(delta), 1j * np.sin(delta)], [1j * np.sin(delta), np.cos(delta)]])
        np.testing.assert_allclose(g.W.data[j, 7], W, atol=1e-15)
        np.testing.assert_allclose(g.L.data[j, 7], L, atol=1e-15)
        np.testing.assert_allclose(g.W.data[j, 7] + g.L.data[j, 7], WL, atol=1e-14)


class TestEigenvalues:
    """Tests for the eigenvalues of Wσ₃"""

    def test_flat(self):
        lat = make_lattice(8, 4, 0.1)
        assert eigenvalues(parse_theta('0'), lat, 0, 0) == pytest.approx((-1.0, 1.0))

    def test_numeric_quadratic(self):
        lat, theta = _probe_theta(0.8, 0.5, 1.0)
        assert eigenvalues(theta, lat, 0, 2) == pytest.approx((-0.8, 0.5))

    def test_complex_roots_flagged(self):
        lat, theta = _probe_theta(0.5, -0.5, 0.0)
        flag = eigenvalues(theta, lat, 0, 2)
        assert isinstance(flag, DegenerateFlag)
        assert flag.reason == 'complex_eigenvalues'
        assert flag.site == (0, 2)

    def test_equal_roots_flagged(self):
        lat = make_lattice(8, 4, 0.1)
        flag = eigenvalues(parse_theta(repr(np.pi / 2)), lat, 0, 0)
        assert flag.reason == 'equal_eigenvalues'

    def test_match_matrix_eigenvalues(self, random_theta_field):
        lat, theta = random_theta_field
        g = build_geometry(theta, lat)
        computed = np.sort(np.stack([g.x_minus.data, g.x_plus.data], -1), axis=-1)
        direct = np.sort(np.linalg.eigvals(g.wsigma3.data).real, axis=-1)
        np.testing.assert_allclose(computed, direct, atol=1e-12)

    def test_time_only(self, example_theta, example_lattice):
        g = build_geometry(example_theta, example_lattice)
        c = np.abs(np.cos(g.theta.data[:-1]))
        np.testing.assert_allclose(g.x_minus.data, -c, atol=1e-12)
        np.testing.assert_allclose(g.x_plus.data, c, atol=1e-12)


class TestZweibeinAndMetric:
    """Tests for the 2-bein, inverse metric and volume density"""

    def test_minkowski(self):
        site = zweibein_and_metric(-1.0, 1.0)
        np.testing.assert_array_equal(site.g_inv, np.diag([1.0, -1.0]))
        np.testing.assert_array_equal(site.e, np.eye(2))
        assert site.mu == 1.0

    def test_numeric(self):
        site = zweibein_and_metric(-0.8, 0.5)
        assert site.g_inv[0, 1] == pytest.approx(-0.15)
        assert site.g_inv[1, 1] == pytest.approx(-0.4)
        assert site.mu == pytest.approx(0.65)
        np.testing.assert_allclose(site.E @ site.e, np.eye(2), atol=1e-15)

    def test_equal_eigenvalues_raise(self):
        with pytest.raises(DegenerateSiteError) as info:
            zweibein_and_metric(0.3, 0.3)
        assert info.value.reason == 'equal_eigenvalues'

    def test_complex_eigenvalues_raise(self):
        with pytest.raises(DegenerateSiteError):
            zweibein_and_metric(np.nan, np.nan)

    def test_time_only_metric(self, example_theta, example_lattice):
        g = build_geometry(example_theta, example_lattice)
        c = np.cos(g.theta.data[:-1])
        np.testing.assert_allclose(g.g_inv.data[..., 0, 0], 1.0)
        np.testing.assert_allclose(g.g_inv.data[..., 0, 1], 0.0, atol=1e-12)
        np.testing.assert_allclose(g.g_inv.data[..., 1, 1], -c ** 2, atol=1e-12)
        np.testing.assert_allclose(g.mu.data, np.abs(c), atol=1e-12)
        np.testing.assert_allclose(g.g.data[..., 1, 1], -c ** -2, atol=1e-10)

    def test_determinant(self, random_theta_field):
        lat, theta = random_theta_field
        g = build_geometry(theta, lat)
        det = np.linalg.det(g.g_inv.data).real
        np.testing.assert_allclose(det, -g.mu.data ** 2, atol=1e-13)


class TestDiagonalizingBasis:
    """Tests for r and its conventions"""

    def test_flat_is_swap(self):
        r, r_inv = diagonalizing_basis(LocalMatrix(entries=SIGMA3.copy(), site=(0, 0)), 1.0)
        np.testing.assert_allclose(r.entries, SIGMA1, atol=1e-15)
        np.testing.assert_allclose(r_inv.entries @ r.entries, np.eye(2), atol=1e-15)

    def test_time_only_closed_form(self, example_theta, example_lattice):
        g = build_geometry(example_theta, example_lattice)
        theta = g.theta.data[:, 0]
        c = np.abs(np.cos(theta[:-1]))
        kappa, sigma = np.cos(theta[1:] / 2), np.sin(theta[1:] / 2)
        expected = np.stack([np.stack([1j * sigma, kappa], -1), np.stack([kappa, 1j * sigma], -1)], -2)
        expected = expected / np.sqrt(c)[:, None, None]
        for p in (0, 31):
            np.testing.assert_allclose(g.r.data[:, p], expected, atol=1e-12)

    def test_time_only_eigenvectors(self, example_theta, example_lattice):
        g = build_geometry(example_theta, example_lattice)
        c = np.abs(np.cos(g.theta.data[:-1]))[..., None]
        b_minus, b_plus = g.r.data[..., 0], g.r.data[..., 1]
        ws = g.wsigma3.data
        np.testing.assert_allclose(np.einsum('jpab,jpb->jpa', ws, b_minus), -c * b_minus, atol=1e-12)
        np.testing.assert_allclose(np.einsum('jpab,jpb->jpa', ws, b_plus), c * b_plus, atol=1e-12)

    def test_random_sites_diagonalized(self, random_theta_field):
        lat, theta = random_theta_field
        g = build_geometry(theta, lat)
        d = g.r_inv.data @ g.wsigma3.data @ g.r.data
        np.testing.assert_allclose(d[..., 0, 0], g.w_minus.data, atol=1e-10)
        np.testing.assert_allclose(d[..., 1, 1], g.w_plus.data, atol=1e-10)
        np.testing.assert_allclose(d[..., 0, 1], 0.0, atol=1e-10)
        np.testing.assert_allclose(d[..., 1, 0], 0.0, atol=1e-10)

    def test_weighted_normalization(self, random_theta_field):
        lat, theta = random_theta_field
        g = build_geometry(theta, lat)
        norms = g.mu.data[..., None] * np.sum(np.abs(g.r.data) ** 2, axis=-2)
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)

    def test_phase_convention(self, random_theta_field):
        lat, theta = random_theta_field
        g = build_geometry(theta, lat)
        anchors = np.stack([g.r.data[..., 1, 0], g.r.data[..., 0, 1]])
        np.testing.assert_allclose(anchors.imag, 0.0, atol=1e-12)
        assert np.all(anchors.real >= 0)

    def test_equal_eigenvalues_raise(self):
        with pytest.raises(DegenerateSiteError):
            diagonalizing_basis(np.eye(2), 1.0)


class TestBuildGeometry:
    """Tests for the whole-lattice assembly"""

    def test_valid_range(self, example_theta, example_lattice):
        g = build_geometry(example_theta, example_lattice)
        assert g.valid == example_lattice.J - 1
        assert not g.degenerate.any()

    def test_degenerate_sites_masked(self, caplog):
        lat = make_lattice(8, 4, 0.1)
        with caplog.at_level(logging.WARNING, logger='dqw_geom.geometry'):
            g = build_geometry(parse_theta(repr(np.pi / 2)), lat)
        assert g.degenerate.all()
        assert np.isnan(g.r.data).all()
        assert g.degenerate_sites()[0] == (0, 0)
        assert 'degenerate' in caplog.text

    def test_strict_raises(self):
        lat = make_lattice(8, 4, 0.1)
        with pytest.raises(DegenerateSiteError) as info:
            build_geometry(parse_theta(repr(np.pi / 2)), lat, strict=True)
        assert info.value.reason == 'equal_eigenvalues'
        assert len(info.value.sites) == 3 * 8

    def test_site_view(self, example_theta, example_lattice):
        g = build_geometry(example_theta, example_lattice)
        site = g.site(4, 10)
        assert site.mu == pytest.approx(g.mu.data[4, 10])
        np.testing.assert_array_equal(site.r, g.r.data[4, 10])

    def test_frame(self, example_theta, example_lattice):
        df = build_geometry(example_theta, example_lattice).to_frame()
        assert list(df.columns) == ['j', 'p', 'x_minus', 'x_plus', 'g00', 'g01', 'g11', 'mu', 'degenerate', 'reason']
        assert len(df) == (example_lattice.J - 1) * example_lattice.P
        assert set(df['reason']) == {'ok'}


class TestWeightedInner:
    """Tests for the μ-weighted product"""

    def test_flat_weight(self):
        lat = make_lattice(8, 4, 0.1)
        psi = random_state(lat, seed=1).values
        phi = random_state(lat, seed=2).values
        assert weighted_inner(psi, phi, np.ones(8)) == pytest.approx(inner(psi, phi))

    def test_weight(self):
        psi = np.ones((4, 2))
        assert weighted_inner(psi, psi, np.array([1.0, 2.0, 0.5, 0.5])).real == pytest.approx(8.0)
