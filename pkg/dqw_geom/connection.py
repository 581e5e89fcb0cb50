"""Discrete spin connection (𝒜, ℬ), mass 𝓜 and their basis changes.

Covariant derivatives of a spinor ψ:

    𝒟_j(𝒜)ψ = 𝒜¹ D_jψ + 𝒜⁰ψ
    𝒟_p(ℬ)ψ = ℬ¹ D_pψ + ℬ² D_ppψ + ℬ⁰ψ

and the walk reads 𝒟_j(𝒜)ψ = (Wσ₃) 𝒟_p(ℬ)ψ + i𝓜ψ. In the original basis
𝒜¹ = 𝟙, ℬ¹ = 𝟙, ℬ² = σ₃. In the diagonal basis b_α (ψ = rφ) 𝒜⁰ and ℬ⁰
are diagonal and trace-free and 𝓜 is anti-diagonal.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .calculus import dj, dp, dpp
from .errors import DegenerateSiteError
from .geometry import DEGENERACY_TOL, GeometryField
from .lattice import (IDENTITY, SIGMA3, Basis, Field, Lattice, SpinorField, apply, diag_matrix, diag_part,
                      from_data, offdiag_part, pad_slices, require_same_basis, trim)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeConnection:
    A0: Field
    A1: Field
    basis: Basis = Basis.ORIGINAL

    @property
    def valid(self) -> int:
        return min(self.A0.valid, self.A1.valid)


@dataclass(frozen=True)
class SpaceConnection:
    B0: Field
    B1: Field
    B2: Field
    basis: Basis = Basis.ORIGINAL

    @property
    def valid(self) -> int:
        return min(self.B0.valid, self.B1.valid, self.B2.valid)


def _const(lat: Lattice, matrix: np.ndarray) -> Field:
    return from_data(np.broadcast_to(np.asarray(matrix, dtype=complex), lat.shape + (2, 2)).copy(), lat.J)


def original_connection(lat: Lattice) -> Tuple[TimeConnection, SpaceConnection]:
    """𝒜¹ = 𝟙, ℬ¹ = 𝟙, ℬ² = σ₃ with vanishing 0-components, in b_A."""
    zero = np.zeros((2, 2), dtype=complex)
    A = TimeConnection(A0=_const(lat, zero), A1=_const(lat, IDENTITY))
    B = SpaceConnection(B0=_const(lat, zero), B1=_const(lat, IDENTITY), B2=_const(lat, SIGMA3))
    return A, B


# --- basis changes ---

def transform_time_connection(A: TimeConnection, r: Field, r_inv: Field,
                              basis: Basis = Basis.DIAGONAL) -> TimeConnection:
    """𝒜⁰' = r⁻¹𝒜⁰r + r⁻¹𝒜¹ D_j r, 𝒜¹' = r⁻¹𝒜¹r (𝟙 + 2 r⁻¹ D_j r)."""
    A0, A1, rr, ri, djr = trim(A.A0.data, A.A1.data, r.data, r_inv.data, dj(r.data))
    A0_new = ri @ A0 @ rr + ri @ A1 @ djr
    A1_new = ri @ A1 @ rr @ (IDENTITY + 2 * ri @ djr)
    J = A.A0.J
    return TimeConnection(A0=from_data(A0_new, J), A1=from_data(A1_new, J), basis=basis)


def transform_space_connection(B: SpaceConnection, r: Field, r_inv: Field,
                               basis: Basis = Basis.DIAGONAL) -> SpaceConnection:
    """ℬ⁰' = r⁻¹(ℬ⁰r + ℬ¹D_p r + ℬ²D_pp r), ℬ¹' and ℬ²' mix through 2 r⁻¹ D_p r."""
    B0, B1, B2, rr, ri = trim(B.B0.data, B.B1.data, B.B2.data, r.data, r_inv.data)
    dpr, dppr = dp(rr), dpp(rr)
    grow = IDENTITY + 2 * ri @ dppr
    B0_new = ri @ B0 @ rr + ri @ B1 @ dpr + ri @ B2 @ dppr
    B1_new = ri @ B1 @ rr @ grow + 2 * ri @ B2 @ dpr
    B2_new = ri @ B2 @ rr @ grow + 2 * ri @ B1 @ dpr
    J = B.B0.J
    return SpaceConnection(B0=from_data(B0_new, J), B1=from_data(B1_new, J), B2=from_data(B2_new, J), basis=basis)


# --- mass and the diagonal-basis solve ---

def compute_N(W: Field, L: Field, r: Field, r_inv: Field) -> Field:
    """𝓝 = r⁻¹ ½(W+L-𝟙) r - r⁻¹D_j r + (r⁻¹Wσ₃r) r⁻¹(D_p r + σ₃ D_pp r), in b_α."""
    W_, L_, rr, ri, djr = trim(W.data, L.data, r.data, r_inv.data, dj(r.data))
    drift = ri @ (0.5 * (W_ + L_ - IDENTITY)) @ rr
    wsigma3 = ri @ (W_ @ SIGMA3) @ rr
    space = ri @ (dp(rr) + SIGMA3 @ dpp(rr))
    return from_data(drift - ri @ djr + wsigma3 @ space, W.J)


def split_mass(N: Field) -> Tuple[Field, Field]:
    """𝓜 = -i offdiag(𝓝), 𝓞 = diag(𝓝)."""
    return (from_data(-1j * offdiag_part(N.data), N.J), from_data(diag_part(N.data), N.J))


def solve_A0_B0(O: np.ndarray, w_minus: np.ndarray, w_plus: np.ndarray,
                strict: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Trace-free diagonal 𝒜⁰ = diag(a, -a), ℬ⁰ = diag(b, -b) from w₋b - a = 𝓞₋₋, -w₊b + a = 𝓞₊₊."""
    O = np.asarray(O, dtype=complex)
    w_minus, w_plus = np.asarray(w_minus, dtype=float), np.asarray(w_plus, dtype=float)
    gap = w_minus - w_plus
    singular = np.abs(gap) <= DEGENERACY_TOL
    if strict and np.any(singular):
        sites = [tuple(s) for s in np.argwhere(np.atleast_2d(singular))]
        raise DegenerateSiteError('w_minus equals w_plus, A0/B0 solve is singular', sites,
                                  reason='equal_eigenvalues')
    with np.errstate(divide='ignore', invalid='ignore'):
        b = np.where(singular, np.nan, (O[..., 0, 0] + O[..., 1, 1]) / gap)
    a = w_minus * b - O[..., 0, 0]
    return diag_matrix(a, -a), diag_matrix(b, -b)


@dataclass(frozen=True)
class WalkConnection:
    """The walk's connection, mass and residual operator in the diagonal basis."""
    A: TimeConnection
    B: SpaceConnection
    mass: Field
    O: Field
    N: Field
    wsigma3: Field
    geometry: GeometryField

    @property
    def valid(self) -> int:
        return min(self.A.valid, self.B.valid, self.mass.valid)

    @property
    def mass_bar(self) -> np.ndarray:
        """𝓜⁻₊ on the valid slices."""
        return self.mass.data[..., 0, 1]

    def mass_squared(self) -> np.ndarray:
        return mass_squared(self.mass)


def walk_connection(geometry: GeometryField) -> WalkConnection:
    lat = geometry.lat
    r, r_inv = geometry.r, geometry.r_inv
    A, B = original_connection(lat)
    A_alpha = transform_time_connection(A, r, r_inv)
    B_alpha = transform_space_connection(B, r, r_inv)

    N = compute_N(geometry.W, geometry.L, r, r_inv)
    mass, O = split_mass(N)
    n = N.valid
    w_minus, w_plus = geometry.w_minus.data[:n], geometry.w_plus.data[:n]
    A0, B0 = solve_A0_B0(O.data, w_minus, w_plus, strict=False)

    W_, rr, ri = trim(geometry.W.data, r.data, r_inv.data)
    wsigma3 = ri @ (W_ @ SIGMA3) @ rr

    J = lat.J
    A_alpha = TimeConnection(A0=from_data(A0, J), A1=A_alpha.A1, basis=Basis.DIAGONAL)
    B_alpha = SpaceConnection(B0=from_data(B0, J), B1=B_alpha.B1, B2=B_alpha.B2, basis=Basis.DIAGONAL)
    logger.debug("walk connection solved on %d slices", n)
    return WalkConnection(A=A_alpha, B=B_alpha, mass=mass, O=O, N=N,
                          wsigma3=from_data(wsigma3, J), geometry=geometry)


def mass_squared(mass: Field) -> np.ndarray:
    """𝓜⁻₊ 𝓜⁺₋, invariant under local boosts."""
    return mass.data[..., 0, 1] * mass.data[..., 1, 0]


@dataclass(frozen=True)
class OriginalBasisConnection:
    A0: Field
    B0: Field
    mass: Field


def to_original_basis(conn: WalkConnection) -> OriginalBasisConnection:
    """𝒜⁰, ℬ⁰ and 𝓜 pulled back to b_A (𝒜¹ = ℬ¹ = 𝟙, ℬ² = σ₃ there)."""
    geometry = conn.geometry
    A0, B0, mass, rr, ri, djr = trim(conn.A.A0.data, conn.B.B0.data, conn.mass.data,
                                     geometry.r.data, geometry.r_inv.data, dj(geometry.r.data))
    A0_orig = rr @ A0 @ ri - djr @ ri
    B0_orig = rr @ B0 @ ri - (dp(rr) + SIGMA3 @ dpp(rr)) @ ri
    J = geometry.lat.J
    return OriginalBasisConnection(A0=from_data(A0_orig, J), B0=from_data(B0_orig, J),
                                   mass=from_data(rr @ mass @ ri, J))


# --- spinors ---

def change_basis(psi: SpinorField, matrix: Field, basis: Basis) -> SpinorField:
    """Apply a per-site matrix (r or r⁻¹) to a spinor field and retag it."""
    values, m = trim(psi.data, matrix.data)
    return SpinorField(values=pad_slices(apply(m, values), psi.J), valid=values.shape[0], basis=basis)


def to_diagonal_basis(psi: SpinorField, geometry: GeometryField) -> SpinorField:
    require_same_basis(psi.basis, Basis.ORIGINAL)
    return change_basis(psi, geometry.r_inv, Basis.DIAGONAL)


def from_diagonal_basis(phi: SpinorField, geometry: GeometryField) -> SpinorField:
    require_same_basis(phi.basis, Basis.DIAGONAL)
    return change_basis(phi, geometry.r, Basis.ORIGINAL)


def covariant_dj(A: TimeConnection, psi: SpinorField) -> SpinorField:
    """𝒟_j(𝒜)ψ = 𝒜¹ D_jψ + 𝒜⁰ψ."""
    require_same_basis(A.basis, psi.basis)
    A0, A1, values, djv = trim(A.A0.data, A.A1.data, psi.data, dj(psi.data))
    out = apply(A1, djv) + apply(A0, values)
    return SpinorField(values=pad_slices(out, psi.J), valid=out.shape[0], basis=psi.basis)


def covariant_dp(B: SpaceConnection, psi: SpinorField) -> SpinorField:
    """𝒟_p(ℬ)ψ = ℬ¹ D_pψ + ℬ² D_ppψ + ℬ⁰ψ."""
    require_same_basis(B.basis, psi.basis)
    B0, B1, B2, values = trim(B.B0.data, B.B1.data, B.B2.data, psi.data)
    out = apply(B1, dp(values)) + apply(B2, dpp(values)) + apply(B0, values)
    return SpinorField(values=pad_slices(out, psi.J), valid=out.shape[0], basis=psi.basis)


def equation_of_motion_residual(psi: SpinorField, conn: WalkConnection,
                                basis: Basis = Basis.ORIGINAL) -> np.ndarray:
    """|𝒟_j(𝒜)ψ - (Wσ₃)𝒟_p(ℬ)ψ - i𝓜ψ| per site, for a stored walk history ψ in b_A.

    With basis=DIAGONAL the check runs on φ = r⁻¹ψ with the b_α connection.
    """
    require_same_basis(psi.basis, Basis.ORIGINAL)
    geometry = conn.geometry
    if basis is Basis.DIAGONAL:
        state = to_diagonal_basis(psi, geometry)
        A, B, mass, wsigma3 = conn.A, conn.B, conn.mass, conn.wsigma3
    else:
        state = psi
        orig = to_original_basis(conn)
        A_, B_ = original_connection(geometry.lat)
        A = TimeConnection(A0=orig.A0, A1=A_.A1)
        B = SpaceConnection(B0=orig.B0, B1=B_.B1, B2=B_.B2)
        mass, wsigma3 = orig.mass, geometry.wsigma3
    lhs = covariant_dj(A, state).data
    rhs_space = covariant_dp(B, state).data
    lhs, rhs_space, values, ws, m = trim(lhs, rhs_space, state.data, wsigma3.data, mass.data)
    residual = lhs - apply(ws, rhs_space) - 1j * apply(m, values)
    return np.max(np.abs(residual), axis=-1)
