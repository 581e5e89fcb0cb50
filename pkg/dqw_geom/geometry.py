"""Discrete geometry read off the two-step walk.

Composing two coin-shift steps gives

    ψ_{j+2,p} = M₊ ψ_{j,p+2} + M₀ ψ_{j,p} + M₋ ψ_{j,p-2}

with W = M₊ + M₋, Wσ₃ = M₊ - M₋ and L = M₀. The eigenvalues x₋ ≤ x₊ of Wσ₃
fix the 2-bein, the inverse metric and the volume density μ = (x₊ - x₋)/2;
its eigenvectors, normalized with weight μ, form the diagonalizing basis r.
Everything at slice j needs θ at slices j and j+1, so geometry fields hold
J-1 valid slices.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .errors import DegenerateSiteError, FieldRangeError
from .lattice import Field, Lattice, LocalMatrix, from_data, inv2, wrap_p
from .theta import ThetaSpec, eval_theta, theta_field

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-12

OK, COMPLEX_EIGENVALUES, EQUAL_EIGENVALUES = 0, 1, 2
REASONS = {OK: 'ok', COMPLEX_EIGENVALUES: 'complex_eigenvalues', EQUAL_EIGENVALUES: 'equal_eigenvalues'}

ThetaSource = Union[ThetaSpec, Field]


@dataclass(frozen=True)
class DegenerateFlag:
    reason: str
    site: Optional[Tuple[int, int]] = None


@dataclass(frozen=True)
class GeometrySite:
    x_minus: float
    x_plus: float
    e: np.ndarray       # e[mu, a] = e^mu_a
    E: np.ndarray       # E[a, mu] = E^a_mu
    g_inv: np.ndarray   # g^{mu nu}
    mu: float
    r: Optional[np.ndarray] = None
    r_inv: Optional[np.ndarray] = None


# --- array kernels, shared by the per-site and whole-lattice entry points ---

def neighbour_trig(theta: np.ndarray) -> Tuple[np.ndarray, ...]:
    """From θ on n+1 slices, (c1, s1, cp, sp, cm, sm) on n slices.

    c1 = cos θ_{j+1,p}, cp = cos θ_{j,p+1}, cm = cos θ_{j,p-1}, and likewise sines.
    """
    c, s = np.cos(theta), np.sin(theta)
    c1, s1 = c[1:], s[1:]
    cp, sp = np.roll(c[:-1], -1, axis=1), np.roll(s[:-1], -1, axis=1)
    cm, sm = np.roll(c[:-1], 1, axis=1), np.roll(s[:-1], 1, axis=1)
    return c1, s1, cp, sp, cm, sm


def _matrix(a00, a01, a10, a11) -> np.ndarray:
    a00 = np.asarray(a00)
    out = np.empty(a00.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a00
    out[..., 0, 1] = a01
    out[..., 1, 0] = a10
    out[..., 1, 1] = a11
    return out


def coefficients(c1, s1, cp, sp, cm, sm) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(M₊, M₀, M₋) of the composed two-step map."""
    zero = np.zeros_like(np.asarray(c1, dtype=float))
    m_plus = _matrix(c1 * cp, zero, 1j * s1 * cp, zero)
    m_minus = _matrix(zero, 1j * s1 * cm, zero, c1 * cm)
    m_zero = _matrix(s1 * sm, -1j * c1 * sp, -1j * c1 * sm, s1 * sp)
    return m_plus, m_zero, m_minus


def characteristic_roots(c1, cp, cm) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Roots of x² + c_{j+1,p}(c_{j,p-1} - c_{j,p+1}) x - c_{j,p-1}c_{j,p+1}.

    Returns (x_minus, x_plus, reason); complex roots come back as NaN.
    """
    c1, cp, cm = (np.asarray(v, dtype=float) for v in (c1, cp, cm))
    b = c1 * (cm - cp)
    disc = b ** 2 + 4 * cm * cp
    root = np.sqrt(np.maximum(disc, 0.0))
    reason = np.full(disc.shape, OK, dtype=int)
    reason[root <= DEGENERACY_TOL] = EQUAL_EIGENVALUES
    reason[disc < -DEGENERACY_TOL] = COMPLEX_EIGENVALUES
    x_minus = np.where(reason == COMPLEX_EIGENVALUES, np.nan, (-b - root) / 2)
    x_plus = np.where(reason == COMPLEX_EIGENVALUES, np.nan, (-b + root) / 2)
    return x_minus, x_plus, reason


def branch_order(x_minus, x_plus, cp, cm) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues attached to b₋ and b₊; they follow the sign of the spatial cosines."""
    flip = (np.asarray(cm) + np.asarray(cp)) < 0
    return np.where(flip, x_plus, x_minus), np.where(flip, x_minus, x_plus)


def zweibein_arrays(x_minus, x_plus) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(e, E, g_inv, mu) from sorted eigenvalues; E is NaN where mu vanishes."""
    x_minus, x_plus = np.asarray(x_minus, dtype=float), np.asarray(x_plus, dtype=float)
    half_sum = (x_plus + x_minus) / 2
    mu = (x_plus - x_minus) / 2
    one, zero = np.ones_like(mu), np.zeros_like(mu)
    e = np.stack([np.stack([one, zero], -1), np.stack([half_sum, mu], -1)], -2)
    with np.errstate(divide='ignore', invalid='ignore'):
        inv_mu = np.where(mu > DEGENERACY_TOL, 1.0 / mu, np.nan)
    E = np.stack([np.stack([one, zero], -1), np.stack([-half_sum * inv_mu, inv_mu], -1)], -2)
    g_inv = np.stack([np.stack([one, half_sum], -1), np.stack([half_sum, x_plus * x_minus], -1)], -2)
    return e, E, g_inv, mu


def _eigenvector(m: np.ndarray, w: np.ndarray, anchor: int) -> np.ndarray:
    va = np.stack([m[..., 0, 1], w - m[..., 0, 0]], -1)
    vb = np.stack([w - m[..., 1, 1], m[..., 1, 0]], -1)
    use_a = np.linalg.norm(va, axis=-1) >= np.linalg.norm(vb, axis=-1)
    v = np.where(use_a[..., None], va, vb)
    size = np.linalg.norm(v, axis=-1)
    pivot = np.where(np.abs(v[..., anchor]) > DEGENERACY_TOL * size, v[..., anchor], v[..., 1 - anchor])
    with np.errstate(divide='ignore', invalid='ignore'):
        phase = np.conj(pivot) / np.abs(pivot)
    return v * phase[..., None]


def diagonal_basis_arrays(wsigma3: np.ndarray, mu: np.ndarray, w_minus: np.ndarray,
                          w_plus: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """r = [b₋ | b₊] with μ b†b = 1, b₋ second component and b₊ first component real ≥ 0."""
    mu = np.asarray(mu, dtype=float)
    columns = []
    for w, anchor in ((w_minus, 1), (w_plus, 0)):
        v = _eigenvector(wsigma3, np.asarray(w, dtype=complex), anchor)
        with np.errstate(divide='ignore', invalid='ignore'):
            scale = 1.0 / np.sqrt(mu * np.sum(np.abs(v) ** 2, axis=-1))
        columns.append(v * scale[..., None])
    r = np.stack(columns, axis=-1)
    return r, inv2(r)


# --- per-site operations ---

def _theta_at(theta: ThetaSource, lat: Lattice, j: int, p: int) -> float:
    if isinstance(theta, Field):
        if not 0 <= j < theta.valid:
            raise FieldRangeError(f"theta slice j={j} outside [0, {theta.valid})")
        return float(theta.values[j, wrap_p(p, lat.P)])
    return eval_theta(theta, lat, j, p)


def _site_trig(theta: ThetaSource, lat: Lattice, j: int, p: int) -> Tuple[float, ...]:
    t1 = _theta_at(theta, lat, j + 1, p)
    tp = _theta_at(theta, lat, j, p + 1)
    tm = _theta_at(theta, lat, j, p - 1)
    return np.cos(t1), np.sin(t1), np.cos(tp), np.sin(tp), np.cos(tm), np.sin(tm)


def two_step_coefficients(theta: ThetaSource, lat: Lattice, j: int,
                          p: int) -> Tuple[LocalMatrix, LocalMatrix, LocalMatrix]:
    site = (j, wrap_p(p, lat.P))
    return tuple(LocalMatrix(entries=m, site=site) for m in coefficients(*_site_trig(theta, lat, j, p)))


def local_W(theta: ThetaSource, lat: Lattice, j: int, p: int) -> LocalMatrix:
    m_plus, _, m_minus = two_step_coefficients(theta, lat, j, p)
    return LocalMatrix(entries=m_plus.entries + m_minus.entries, site=m_plus.site)


def local_L(theta: ThetaSource, lat: Lattice, j: int, p: int) -> LocalMatrix:
    return two_step_coefficients(theta, lat, j, p)[1]


def eigenvalues(theta: ThetaSource, lat: Lattice, j: int, p: int) -> Union[Tuple[float, float], DegenerateFlag]:
    c1, _, cp, _, cm, _ = _site_trig(theta, lat, j, p)
    x_minus, x_plus, reason = characteristic_roots(c1, cp, cm)
    if int(reason) != OK:
        return DegenerateFlag(reason=REASONS[int(reason)], site=(j, wrap_p(p, lat.P)))
    return float(x_minus), float(x_plus)


def zweibein_and_metric(x_minus: float, x_plus: float) -> GeometrySite:
    if not (np.isfinite(x_minus) and np.isfinite(x_plus)):
        raise DegenerateSiteError('eigenvalues are not real', reason=REASONS[COMPLEX_EIGENVALUES])
    x_minus, x_plus = sorted((float(x_minus), float(x_plus)))
    e, E, g_inv, mu = zweibein_arrays(x_minus, x_plus)
    if not mu > DEGENERACY_TOL:
        raise DegenerateSiteError('mu vanishes, the inverse 2-bein is undefined',
                                  reason=REASONS[EQUAL_EIGENVALUES])
    return GeometrySite(x_minus=x_minus, x_plus=x_plus, e=e, E=E, g_inv=g_inv, mu=float(mu))


def diagonalizing_basis(wsigma3: Union[LocalMatrix, np.ndarray], mu: float,
                        w_minus: Optional[float] = None,
                        w_plus: Optional[float] = None) -> Tuple[LocalMatrix, LocalMatrix]:
    """Eigenbasis of one Wσ₃; without branch labels b₋ takes the smaller eigenvalue."""
    site = wsigma3.site if isinstance(wsigma3, LocalMatrix) else (0, 0)
    m = wsigma3.entries if isinstance(wsigma3, LocalMatrix) else np.asarray(wsigma3, dtype=complex)
    if w_minus is None or w_plus is None:
        tr, det = np.trace(m), np.linalg.det(m)
        disc = tr ** 2 - 4 * det
        if disc.real < -DEGENERACY_TOL or abs(disc.imag) > DEGENERACY_TOL:
            raise DegenerateSiteError('complex eigenvalues', [site], reason=REASONS[COMPLEX_EIGENVALUES])
        root = np.sqrt(max(disc.real, 0.0))
        w_minus, w_plus = (tr.real - root) / 2, (tr.real + root) / 2
    if abs(w_plus - w_minus) <= DEGENERACY_TOL or not mu > DEGENERACY_TOL:
        raise DegenerateSiteError('equal eigenvalues', [site], reason=REASONS[EQUAL_EIGENVALUES])
    r, r_inv = diagonal_basis_arrays(m, mu, w_minus, w_plus)
    return LocalMatrix(entries=r, site=site), LocalMatrix(entries=r_inv, site=site)


def weighted_inner(psi: np.ndarray, phi: np.ndarray, mu: np.ndarray) -> complex:
    """⟨ψ, φ⟩_s = Σ_p μ_p Σ_A conj(ψ^A_p) φ^A_p on one slice."""
    return complex(np.sum(mu * np.sum(np.conj(psi) * phi, axis=-1)))


# --- whole lattice ---

@dataclass(frozen=True)
class GeometryField:
    lat: Lattice
    theta: Field
    W: Field
    L: Field
    wsigma3: Field
    m_plus: Field
    m_zero: Field
    m_minus: Field
    x_minus: Field
    x_plus: Field
    w_minus: Field
    w_plus: Field
    e: Field
    E: Field
    g_inv: Field
    g: Field
    mu: Field
    r: Field
    r_inv: Field
    reason: np.ndarray

    @property
    def valid(self) -> int:
        return self.r.valid

    @property
    def degenerate(self) -> np.ndarray:
        return self.reason != OK

    def degenerate_sites(self) -> List[Tuple[int, int]]:
        return [tuple(int(v) for v in site) for site in np.argwhere(self.degenerate)]

    def site(self, j: int, p: int) -> GeometrySite:
        self.r.check_site(j, p)
        return GeometrySite(
            x_minus=float(self.x_minus.values[j, p]), x_plus=float(self.x_plus.values[j, p]),
            e=np.array(self.e.values[j, p]), E=np.array(self.E.values[j, p]),
            g_inv=np.array(self.g_inv.values[j, p]), mu=float(self.mu.values[j, p]),
            r=np.array(self.r.values[j, p]), r_inv=np.array(self.r_inv.values[j, p]),
        )

    def to_frame(self) -> pd.DataFrame:
        n, P = self.reason.shape
        j, p = np.meshgrid(np.arange(n), np.arange(P), indexing='ij')
        g_inv = self.g_inv.data
        return pd.DataFrame({
            'j': j.ravel(), 'p': p.ravel(),
            'x_minus': self.x_minus.data.ravel(), 'x_plus': self.x_plus.data.ravel(),
            'g00': g_inv[..., 0, 0].ravel(), 'g01': g_inv[..., 0, 1].ravel(), 'g11': g_inv[..., 1, 1].ravel(),
            'mu': self.mu.data.ravel(),
            'degenerate': self.degenerate.ravel(),
            'reason': [REASONS[int(code)] for code in self.reason.ravel()],
        })


def build_geometry(theta: ThetaSource, lat: Lattice, strict: bool = False) -> GeometryField:
    """Assemble every geometric field; degenerate sites are masked with NaN or, if strict, raised."""
    theta = theta if isinstance(theta, Field) else theta_field(theta, lat)
    angles = np.asarray(theta.data, dtype=float)
    c1, s1, cp, sp, cm, sm = neighbour_trig(angles)
    m_plus, m_zero, m_minus = coefficients(c1, s1, cp, sp, cm, sm)
    W, wsigma3 = m_plus + m_minus, m_plus - m_minus

    x_minus, x_plus, reason = characteristic_roots(c1, cp, cm)
    w_minus, w_plus = branch_order(x_minus, x_plus, cp, cm)
    e, E, g_inv, mu = zweibein_arrays(x_minus, x_plus)
    r, r_inv = diagonal_basis_arrays(wsigma3, mu, w_minus, w_plus)

    bad = reason != OK
    if bad.any():
        sites = [tuple(s) for s in np.argwhere(bad)]
        codes = sorted({REASONS[int(c)] for c in reason[bad]})
        if strict:
            raise DegenerateSiteError('degenerate sites', sites, reason=','.join(codes))
        logger.warning("%d degenerate site(s) masked (%s), first at %s", len(sites), ', '.join(codes), sites[0])
        for arr in (E, r, r_inv):
            arr[bad] = np.nan

    det = g_inv[..., 0, 0] * g_inv[..., 1, 1] - g_inv[..., 0, 1] ** 2
    with np.errstate(divide='ignore', invalid='ignore'):
        g = np.stack([np.stack([g_inv[..., 1, 1], -g_inv[..., 0, 1]], -1),
                      np.stack([-g_inv[..., 1, 0], g_inv[..., 0, 0]], -1)], -2) / det[..., None, None]
    g[~np.isfinite(g)] = np.nan

    J = lat.J
    logger.debug("geometry built on %s, %d valid slices", lat.describe(), angles.shape[0] - 1)
    return GeometryField(
        lat=lat, theta=theta,
        W=from_data(W, J), L=from_data(m_zero, J), wsigma3=from_data(wsigma3, J),
        m_plus=from_data(m_plus, J), m_zero=from_data(m_zero, J), m_minus=from_data(m_minus, J),
        x_minus=from_data(x_minus, J), x_plus=from_data(x_plus, J),
        w_minus=from_data(w_minus, J), w_plus=from_data(w_plus, J),
        e=from_data(e, J), E=from_data(E, J), g_inv=from_data(g_inv, J), g=from_data(g, J),
        mu=from_data(mu, J), r=from_data(r, J), r_inv=from_data(r_inv, J),
        reason=reason,
    )


