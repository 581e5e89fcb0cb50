"""Local Lorentz transformations in the diagonal basis.

A boost Λ_{j,p} scales ψ⁻ by e^Λ and ψ⁺ by e^-Λ. On the connection and the
mass it acts as the basis change with r = exp(Λσ₃), so the generic laws of
`connection` apply unchanged. From a connection and its boost, D_jΛ and D_pΛ
can be recovered exactly through sinh and tanh relations.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np

from .calculus import dj, dp, dpp
from .connection import SpaceConnection, TimeConnection, transform_space_connection, transform_time_connection
from .errors import InversionDomainError, LorentzCapError, ThetaDomainError
from .lattice import Basis, Field, Lattice, SpinorField, diag_matrix, from_data, pad_slices, require_same_basis, trim
from .theta import evaluate, parse_expression

logger = logging.getLogger(__name__)

LAMBDA_CAP = 20.0
IMAG_RESIDUE_TOL = 1e-10


@dataclass(frozen=True)
class LorentzField:
    field: Field
    cap: float = LAMBDA_CAP

    def __post_init__(self):
        values = self.field.data
        if not np.all(np.isfinite(values)):
            raise LorentzCapError('Lorentz field has non-finite entries')
        worst = float(np.max(np.abs(values))) if values.size else 0.0
        if worst > self.cap:
            raise LorentzCapError(f"|Lambda| reaches {worst:.3g}, above the cap {self.cap:g}")

    @property
    def data(self) -> np.ndarray:
        return self.field.data

    def __neg__(self) -> 'LorentzField':
        return LorentzField(field=from_data(-self.data, self.field.J), cap=self.cap)


def lorentz_field(source: Union[str, np.ndarray], lat: Lattice, cap: float = LAMBDA_CAP) -> LorentzField:
    """Λ from an expression in t and x (same language as θ) or an explicit (J, P) array."""
    if isinstance(source, str):
        tree = parse_expression(source)
        values = evaluate(tree, lat.t[:, None], lat.x[None, :])
        values = np.array(np.broadcast_to(np.asarray(values, dtype=float), lat.shape))
        bad = np.argwhere(~np.isfinite(values))
        if bad.size:
            raise ThetaDomainError(f"Lambda '{source}' is not finite", site=tuple(bad[0]))
    else:
        values = np.asarray(source, dtype=float)
        if values.shape != lat.shape:
            raise ValueError(f"Lambda array shape {values.shape} does not match lattice {lat.shape}")
    return LorentzField(field=from_data(values, lat.J), cap=cap)


def boost_matrices(lam: LorentzField) -> Tuple[Field, Field]:
    """r = diag(e^Λ, e^-Λ) and its inverse."""
    up, down = np.exp(lam.data), np.exp(-lam.data)
    J = lam.field.J
    return from_data(diag_matrix(up, down), J), from_data(diag_matrix(down, up), J)


def boost_spinor(phi: SpinorField, lam: LorentzField) -> SpinorField:
    """ψ⁻ → e^Λ ψ⁻, ψ⁺ → e^-Λ ψ⁺."""
    require_same_basis(phi.basis, Basis.DIAGONAL)
    values, scale = trim(phi.data, lam.data)
    out = values * np.stack([np.exp(scale), np.exp(-scale)], axis=-1)
    return SpinorField(values=pad_slices(out, phi.J), valid=out.shape[0], basis=phi.basis)


def boost_connection(A: TimeConnection, B: SpaceConnection,
                     lam: LorentzField) -> Tuple[TimeConnection, SpaceConnection]:
    require_same_basis(A.basis, Basis.DIAGONAL)
    require_same_basis(B.basis, Basis.DIAGONAL)
    r, r_inv = boost_matrices(lam)
    return (transform_time_connection(A, r, r_inv, basis=Basis.DIAGONAL),
            transform_space_connection(B, r, r_inv, basis=Basis.DIAGONAL))


def boost_mass(mass: Field, lam: LorentzField) -> Field:
    """𝓜(Λ) = r⁻¹𝓜r: off-diagonal entries pick up e^{∓2Λ}."""
    r, r_inv = boost_matrices(lam)
    m, rr, ri = trim(mass.data, r.data, r_inv.data)
    return from_data(ri @ m @ rr, mass.J)


def _mm(x: np.ndarray) -> np.ndarray:
    return x[..., 0, 0]


def _pp(x: np.ndarray) -> np.ndarray:
    return x[..., 1, 1]


def diagonal_boost_laws(A: TimeConnection, B: SpaceConnection, lam: LorentzField) -> Dict[str, np.ndarray]:
    """Boosted diagonal entries of 𝒜⁰, ℬ⁰ and ℬ¹ written out in closed form."""
    A0, A1, djl = trim(A.A0.data, A.A1.data, dj(lam.data))
    B0, B1, B2, lam_b = trim(B.B0.data, B.B1.data, B.B2.data, lam.data)
    a, b = dp(lam_b), dpp(lam_b)
    grow, shrink = np.exp(2 * b), np.exp(-2 * b)
    return {
        'A0_mm': _mm(A0) + _mm(A1) * 0.5 * (np.exp(2 * djl) - 1),
        'A0_pp': _pp(A0) + _pp(A1) * 0.5 * (np.exp(-2 * djl) - 1),
        'B0_mm': _mm(B0) + 0.5 * _mm(B1) * grow * np.sinh(2 * a) + _mm(B2) * 0.5 * (grow * np.cosh(2 * a) - 1),
        'B0_pp': _pp(B0) + 0.5 * _pp(B1) * shrink * np.sinh(-2 * a) + _pp(B2) * 0.5 * (shrink * np.cosh(-2 * a) - 1),
        'B1_mm': _mm(B1) * grow * np.cosh(2 * a) + _mm(B2) * grow * np.sinh(2 * a),
        'B1_pp': _pp(B1) * shrink * np.cosh(-2 * a) + _pp(B2) * shrink * np.sinh(-2 * a),
    }


def slow_regime_laws(B: SpaceConnection, lam: LorentzField) -> Dict[str, np.ndarray]:
    """First-order laws when D_pΛ is small and D_ppΛ smaller still."""
    B0, B1, B2, lam_b = trim(B.B0.data, B.B1.data, B.B2.data, lam.data)
    a = dp(lam_b)
    return {
        'B0_mm': _mm(B0) + _mm(B1) * a,
        'B0_pp': _pp(B0) - _pp(B1) * a,
        'B1_mm': _mm(B1) + 2 * _mm(B2) * a,
        'B1_pp': _pp(B1) - 2 * _pp(B2) * a,
    }


def _sites(mask: np.ndarray):
    return [tuple(s) for s in np.argwhere(mask)]


def _warn_residue(name: str, value: np.ndarray) -> None:
    finite = np.abs(value.imag[np.isfinite(value)])
    if finite.size and finite.max() > IMAG_RESIDUE_TOL:
        logger.warning("%s has an imaginary residue of %.3e", name, float(finite.max()))


def recover_dj_complex(A_lam: TimeConnection, A: TimeConnection) -> np.ndarray:
    A0_l, A0, A1 = trim(A_lam.A0.data, A.A0.data, A.A1.data)
    denom = _mm(A1) * _pp(A1)
    bad = np.abs(denom) == 0
    if np.any(bad):
        raise InversionDomainError('(A1)-- (A1)++ vanishes', _sites(bad))
    delta = _pp(A1) * (_mm(A0_l) - _mm(A0)) - _mm(A1) * (_pp(A0_l) - _pp(A0))
    return 0.5 * np.arcsinh(delta / denom)


def recover_dp_complex(B_lam: SpaceConnection, B: SpaceConnection) -> np.ndarray:
    B0_l, B1_l, B0, B1, B2 = trim(B_lam.B0.data, B_lam.B1.data, B.B0.data, B.B1.data, B.B2.data)
    x_mm = _mm(B0_l) - _mm(B0) + _mm(B2) / 2
    x_pp = _pp(B0_l) - _pp(B0) + _pp(B2) / 2
    s_mm = -_mm(B1) * x_mm + _mm(B2) * _mm(B1_l) / 2
    c_mm = _mm(B2) * x_mm - _mm(B1) * _mm(B1_l) / 2
    s_pp = _pp(B1) * x_pp - _pp(B2) * _pp(B1_l) / 2
    c_pp = _pp(B1) * _pp(B1_l) / 2 - _pp(B2) * x_pp
    bad = (np.abs(c_mm) == 0) | (np.abs(c_pp) == 0)
    if np.any(bad):
        raise InversionDomainError('C-- or C++ vanishes', _sites(bad))
    arg = 0.5 * (s_mm / c_mm - s_pp / c_pp)
    outside = np.abs(arg.real) >= 1
    if np.any(outside):
        raise InversionDomainError('|tanh argument| >= 1', _sites(outside))
    return 0.5 * np.arctanh(arg)


def recover_DjLambda(A_lam: TimeConnection, A: TimeConnection) -> Field:
    """L_j(𝒜(Λ), 𝒜) = ½ asinh(Δ𝒜⁰ / ((𝒜¹)⁻⁻(𝒜¹)⁺⁺))."""
    value = recover_dj_complex(A_lam, A)
    _warn_residue('L_j', value)
    return from_data(value.real, A.A0.J)


def recover_DpLambda(B_lam: SpaceConnection, B: SpaceConnection) -> Field:
    """L_p(ℬ(Λ), ℬ) = ½ atanh(½(𝒯⁻⁻ - 𝒯⁺⁺))."""
    value = recover_dp_complex(B_lam, B)
    _warn_residue('L_p', value)
    return from_data(value.real, B.B0.J)


def slow_estimates(A_lam: TimeConnection, A: TimeConnection, B_lam: SpaceConnection,
                   B: SpaceConnection) -> Tuple[Field, Field]:
    """Slow-regime estimates of (D_jΛ, D_pΛ) from the 0-component variations alone."""
    A0_l, A0, A1 = trim(A_lam.A0.data, A.A0.data, A.A1.data)
    B0_l, B0, B1 = trim(B_lam.B0.data, B.B0.data, B.B1.data)
    with np.errstate(divide='ignore', invalid='ignore'):
        dj_est = 0.5 * ((_mm(A0_l) - _mm(A0)) / _mm(A1) - (_pp(A0_l) - _pp(A0)) / _pp(A1))
        dp_est = 0.5 * ((_mm(B0_l) - _mm(B0)) / _mm(B1) - (_pp(B0_l) - _pp(B0)) / _pp(B1))
    return from_data(dj_est.real, A.A0.J), from_data(dp_est.real, B.B0.J)
