"""Discrete Riemann curvatures ρ* and ρˢ and the continuous-limit harness.

    ρˢ(Λ) = ½ D_j[(ℬ⁰(Λ))⁻⁻/(ℬ¹)⁻⁻ - (ℬ⁰(Λ))⁺⁺/(ℬ¹)⁺⁺]
          - ½ D_p[(𝒜⁰(Λ))⁻⁻/(𝒜¹)⁻⁻ - (𝒜⁰(Λ))⁺⁺/(𝒜¹)⁺⁺]

    ρ*(0) = -D_p L_j(𝒜*, 𝒜) + D_j L_p(ℬ*, ℬ)

For a time-only profile θ(t) = arccos(1/a(t)), ρˢ/ε² tends to +½ ∂²_t a.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from .calculus import dj, dp
from .connection import SpaceConnection, TimeConnection, walk_connection
from .errors import InversionDomainError
from .geometry import build_geometry
from .lattice import Field, Lattice, from_data, make_lattice, trim
from .lorentz import IMAG_RESIDUE_TOL, LorentzField, boost_connection, recover_dj_complex, recover_dp_complex
from .theta import ThetaSpec, evaluate

logger = logging.getLogger(__name__)

CONTINUUM_SIGN = 1.0


@dataclass(frozen=True)
class CurvatureField:
    """Real curvature values plus the magnitude of the discarded imaginary part."""
    values: Field
    residue: np.ndarray

    @property
    def valid(self) -> int:
        return self.values.valid

    @property
    def data(self) -> np.ndarray:
        return self.values.data

    @property
    def max_residue(self) -> float:
        finite = self.residue[np.isfinite(self.residue)]
        return float(finite.max()) if finite.size else 0.0

    def to_frame(self, name: str = 'rho') -> pd.DataFrame:
        n, P = self.data.shape
        j, p = np.meshgrid(np.arange(n), np.arange(P), indexing='ij')
        return pd.DataFrame({'j': j.ravel(), 'p': p.ravel(), name: self.data.ravel(),
                             f"{name}_imag": self.residue.ravel()})


def _curvature(value: np.ndarray, J: int, name: str) -> CurvatureField:
    residue = np.abs(np.imag(value))
    field = CurvatureField(values=from_data(np.real(value), J), residue=residue)
    if field.max_residue > IMAG_RESIDUE_TOL:
        logger.warning("%s has an imaginary residue of %.3e", name, field.max_residue)
    return field


def _ratio_gap(numerator: np.ndarray, denominator: np.ndarray, name: str) -> np.ndarray:
    numerator, denominator = trim(numerator, denominator)
    diagonal = np.stack([denominator[..., 0, 0], denominator[..., 1, 1]], axis=-1)
    zero = np.any(diagonal == 0, axis=-1)
    if np.any(zero):
        raise InversionDomainError(f"{name} has a vanishing diagonal entry", [tuple(s) for s in np.argwhere(zero)])
    with np.errstate(divide='ignore', invalid='ignore'):
        return numerator[..., 0, 0] / denominator[..., 0, 0] - numerator[..., 1, 1] / denominator[..., 1, 1]


def _rho_slow(A0: np.ndarray, A1: np.ndarray, B0: np.ndarray, B1: np.ndarray) -> np.ndarray:
    time_part, space_part = trim(dj(_ratio_gap(B0, B1, "B1")), dp(_ratio_gap(A0, A1, "A1")))
    return 0.5 * time_part - 0.5 * space_part


def rho_slow(A: TimeConnection, B: SpaceConnection) -> CurvatureField:
    """ρˢ(0) of a diagonal-basis connection."""
    value = _rho_slow(A.A0.data, A.A1.data, B.B0.data, B.B1.data)
    return _curvature(value, A.A0.J, 'rho_s')


def rho_slow_transformed(A: TimeConnection, B: SpaceConnection, lam: LorentzField) -> CurvatureField:
    """ρˢ(Λ): boosted 0-components over the original 1-components."""
    A_lam, B_lam = boost_connection(A, B, lam)
    value = _rho_slow(A_lam.A0.data, A.A1.data, B_lam.B0.data, B.B1.data)
    return _curvature(value, A.A0.J, 'rho_s(Lambda)')


def rho_star(A: TimeConnection, B: SpaceConnection, A_ref: TimeConnection,
             B_ref: SpaceConnection) -> CurvatureField:
    """ρ*(0) against the reference connection (A_ref, B_ref)."""
    l_j = recover_dj_complex(A_ref, A)
    l_p = recover_dp_complex(B_ref, B)
    space_part, time_part = trim(dp(l_j), dj(l_p))
    return _curvature(-space_part + time_part, A.A0.J, 'rho_star')


def mixed_to_coordinate(rho: CurvatureField, E: Field) -> Field:
    """R_{0101} on the coordinate basis: ρ (E⁰₀E¹₁ - E⁰₁E¹₀)."""
    values, E_ = trim(rho.data, E.data)
    det = E_[..., 0, 0] * E_[..., 1, 1] - E_[..., 0, 1] * E_[..., 1, 0]
    return from_data(values * np.real(det), rho.values.J)


def ricci_scalar(R_coord: Field, g_inv: Field) -> Field:
    """R = g^{μα}g^{νβ}R_{μναβ} = 2 (g^{00}g^{11} - (g^{01})²) R_{0101}."""
    values, g = trim(R_coord.data, g_inv.data)
    det = np.real(g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0])
    return from_data(2 * det * values, R_coord.J)


# --- continuous limit ---

@dataclass(frozen=True)
class ContinuousOracle:
    """Scale factor a(t) of the metric diag(1, -a²) and its derivatives.

    ω_{101} = ∂_t a and 𝓡_{0101} = ∂_t ω_{101}, by 5-point central differences.
    """
    scale: Callable[[np.ndarray], np.ndarray]
    step: float = 1e-3

    @classmethod
    def from_theta(cls, spec: ThetaSpec, step: float = 1e-3) -> 'ContinuousOracle':
        if spec.kind == 'full':
            raise ValueError('the continuous oracle needs a theta that depends on t only')
        return cls(scale=lambda t: 1.0 / np.cos(evaluate(spec.tree, t, 0.0)), step=step)

    def a(self, t: float) -> float:
        return float(self.scale(np.asarray(t, dtype=float)))

    def _samples(self, t: float) -> np.ndarray:
        h = self.step
        return np.broadcast_to(np.asarray(self.scale(t + h * np.arange(-2, 3, dtype=float)), dtype=float), (5,))

    def omega_101(self, t: float) -> float:
        f = self._samples(t)
        return float((f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * self.step))

    def riemann_0101(self, t: float) -> float:
        f = self._samples(t)
        return float((-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * self.step ** 2))

    def expected_rho(self, t: float) -> float:
        """Limit of ρˢ/ε² at time t."""
        return CONTINUUM_SIGN * 0.5 * self.riemann_0101(t)


def observed_orders(errors: Sequence[float], scales: Sequence[float]) -> np.ndarray:
    """log(e_k/e_{k+1}) / log(s_k/s_{k+1}) between successive entries."""
    errors, scales = np.asarray(errors, dtype=float), np.asarray(scales, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.log(errors[:-1] / errors[1:]) / np.log(scales[:-1] / scales[1:])


def richardson_extrapolate(coarse: float, fine: float, order: float = 1.0, ratio: float = 2.0) -> float:
    factor = ratio ** order
    return (factor * fine - coarse) / (factor - 1)


def rho_at_probe(spec: ThetaSpec, eps: float, t_probe: float, P: int = 8) -> Optional[float]:
    """ρˢ/ε² at the slice nearest t_probe; None when the probe slice is degenerate."""
    j_probe = int(round(t_probe / eps))
    lat = make_lattice(P, j_probe + 8, eps)
    geometry = build_geometry(spec, lat)
    if geometry.degenerate[j_probe].any():
        logger.warning("degenerate probe slice j=%d at eps=%g, skipped", j_probe, eps)
        return None
    conn = walk_connection(geometry)
    rho = rho_slow(conn.A, conn.B)
    return float(np.mean(rho.data[j_probe])) / eps ** 2


def convergence_study(spec: ThetaSpec, eps_list: Iterable[float], t_probe: float = 1.0,
                      P: int = 8) -> pd.DataFrame:
    """Table of eps, rho_s/eps², oracle value, error and observed order."""
    oracle = ContinuousOracle.from_theta(spec)
    expected = oracle.expected_rho(t_probe)
    rows = []
    for eps in eps_list:
        value = rho_at_probe(spec, eps, t_probe, P)
        error = np.nan if value is None else abs(value - expected)
        rows.append({'eps': float(eps), 'j_probe': int(round(t_probe / eps)),
                     'rho_scaled': np.nan if value is None else value,
                     'oracle': expected, 'error': error})
        logger.debug("eps=%g rho/eps^2=%s oracle=%g", eps, value, expected)
    df = pd.DataFrame(rows)
    orders = observed_orders(df['error'].to_numpy(), df['eps'].to_numpy()) if len(df) > 1 else []
    df['order'] = np.concatenate([[np.nan], orders]) if len(df) else []
    return df


def scaling_study(amplitudes: Sequence[float], measure: Callable[[float], float]) -> pd.DataFrame:
    """Evaluate `measure(h)` for each amplitude and the observed order between successive rows."""
    gaps = [float(measure(h)) for h in amplitudes]
    df = pd.DataFrame({'amplitude': [float(h) for h in amplitudes], 'gap': gaps})
    df['order'] = np.concatenate([[np.nan], observed_orders(gaps, amplitudes)])
    return df
