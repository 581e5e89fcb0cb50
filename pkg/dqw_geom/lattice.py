"""Lattice bookkeeping and field containers.

Every field stores a full (J, P, ...) ndarray. Stencils in time shrink the
number of meaningful leading slices, which is tracked in `Field.valid`;
slices past it are NaN padding and cannot be read through `Field.at`.
Space is periodic (p is taken mod P), time is stored, never wrapped.
"""
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from .errors import BasisMismatchError, FieldRangeError, LatticeError


IDENTITY = np.eye(2, dtype=complex)
SIGMA3 = np.diag([1.0, -1.0]).astype(complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class Lattice:
    P: int
    J: int
    eps: float

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.J, self.P)

    @property
    def t(self) -> np.ndarray:
        return self.eps * np.arange(self.J)

    @property
    def x(self) -> np.ndarray:
        return self.eps * np.arange(self.P)

    def describe(self) -> str:
        return f"P={self.P} J={self.J} eps={self.eps!r}"


def make_lattice(P: int, J: int, eps: float) -> Lattice:
    """Validate and build a lattice descriptor."""
    if int(P) != P or P % 2 != 0:
        raise LatticeError(f"P must be even (got {P})", field='P')
    if P < 4:
        raise LatticeError(f"P must be at least 4 (got {P})", field='P')
    if int(J) != J or J < 3:
        raise LatticeError(f"J too small: need J >= 3 so that slices j and j+2 exist (got {J})", field='J')
    if not (eps > 0) or not np.isfinite(eps):
        raise LatticeError(f"eps must be a positive finite real (got {eps})", field='eps')
    return Lattice(P=int(P), J=int(J), eps=float(eps))


def wrap_p(p: int, P: int) -> int:
    return p % P


class Basis(Enum):
    ORIGINAL = 'b_A'
    DIAGONAL = 'b_alpha'


@dataclass(frozen=True)
class LocalMatrix:
    entries: np.ndarray
    site: Tuple[int, int]

    def __post_init__(self):
        if self.entries.shape != (2, 2):
            raise ValueError(f"LocalMatrix needs a 2x2 array, got shape {self.entries.shape}")

    def __matmul__(self, other: 'LocalMatrix') -> np.ndarray:
        return self.entries @ other.entries


@dataclass(frozen=True)
class Field:
    """Per-site values over the lattice; scalar, spinor or 2x2 matrix."""
    values: np.ndarray
    valid: int

    def __post_init__(self):
        if self.values.ndim < 2:
            raise FieldRangeError('field values need at least (J, P) axes')
        if not 0 <= self.valid <= self.values.shape[0]:
            raise FieldRangeError(f"valid={self.valid} outside [0, {self.values.shape[0]}]")
        if self.values.flags.writeable:
            frozen = np.array(self.values, copy=True)
            frozen.flags.writeable = False
            object.__setattr__(self, 'values', frozen)

    @property
    def J(self) -> int:
        return self.values.shape[0]

    @property
    def P(self) -> int:
        return self.values.shape[1]

    @property
    def site_shape(self) -> Tuple[int, ...]:
        return self.values.shape[2:]

    @property
    def data(self) -> np.ndarray:
        """The meaningful slices, shape (valid, P, ...)."""
        return self.values[:self.valid]

    def check_site(self, j: int, p: int) -> None:
        if not 0 <= j < self.valid:
            raise FieldRangeError(f"slice j={j} outside the valid range [0, {self.valid})")
        if not 0 <= p < self.P:
            raise FieldRangeError(f"site p={p} outside [0, {self.P})")

    def at(self, j: int, p: int) -> Union[complex, float, np.ndarray, LocalMatrix]:
        self.check_site(j, p)
        value = self.values[j, p]
        if not np.all(np.isfinite(value)):
            raise FieldRangeError(f"site (j={j}, p={p}) is masked")
        if self.site_shape == (2, 2):
            return LocalMatrix(entries=np.array(value), site=(j, p))
        return value


@dataclass(frozen=True)
class SpinorField(Field):
    """Two-component wave function; last axis is (ψ^L, ψ^R) or (ψ⁻, ψ⁺)."""
    basis: Basis = Basis.ORIGINAL

    def __post_init__(self):
        super().__post_init__()
        if self.site_shape != (2,):
            raise FieldRangeError(f"spinor fields need a trailing axis of length 2, got {self.site_shape}")

    def _combine(self, other: 'SpinorField', op) -> 'SpinorField':
        require_same_basis(self.basis, other.basis)
        valid = min(self.valid, other.valid)
        return replace(self, values=op(self.values, other.values), valid=valid)

    def __add__(self, other: 'SpinorField') -> 'SpinorField':
        return self._combine(other, np.add)

    def __sub__(self, other: 'SpinorField') -> 'SpinorField':
        return self._combine(other, np.subtract)

    def slice(self, j: int) -> np.ndarray:
        self.check_site(j, 0)
        return np.array(self.values[j])


def require_same_basis(a: Basis, b: Basis) -> None:
    if a is not b:
        raise BasisMismatchError(f"cannot combine a {a.value} quantity with a {b.value} quantity")


def pad_slices(data: np.ndarray, J: int) -> np.ndarray:
    """Embed `data` (n, P, ...) into a NaN-padded (J, P, ...) array."""
    out = np.full((J,) + data.shape[1:], np.nan, dtype=np.result_type(data.dtype, float))
    out[:data.shape[0]] = data
    return out


def _check_shape(lat: Lattice, values: np.ndarray, site_shape: Tuple[int, ...]) -> None:
    expected = lat.shape + site_shape
    if values.shape != expected:
        raise FieldRangeError(f"field shape {values.shape} does not match lattice shape {expected}")


def scalar_field(lat: Lattice, values: np.ndarray, valid: Optional[int] = None) -> Field:
    values = np.asarray(values)
    _check_shape(lat, values, ())
    return Field(values=values, valid=lat.J if valid is None else valid)


def matrix_field(lat: Lattice, values: np.ndarray, valid: Optional[int] = None) -> Field:
    values = np.asarray(values, dtype=complex)
    _check_shape(lat, values, (2, 2))
    return Field(values=values, valid=lat.J if valid is None else valid)


def spinor_field(lat: Lattice, values: np.ndarray, valid: Optional[int] = None,
                 basis: Basis = Basis.ORIGINAL) -> SpinorField:
    values = np.asarray(values, dtype=complex)
    _check_shape(lat, values, (2,))
    return SpinorField(values=values, valid=lat.J if valid is None else valid, basis=basis)


def constant_matrix_field(lat: Lattice, matrix: np.ndarray) -> Field:
    values = np.broadcast_to(np.asarray(matrix, dtype=complex), lat.shape + (2, 2))
    return matrix_field(lat, np.array(values))


# --- vectorized 2x2 algebra over (..., 2, 2) arrays ---

def det2(m: np.ndarray) -> np.ndarray:
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def inv2(m: np.ndarray) -> np.ndarray:
    det = det2(m)
    out = np.empty_like(m, dtype=complex)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    out[..., 1, 1] = m[..., 0, 0]
    with np.errstate(divide='ignore', invalid='ignore'):
        return out / det[..., None, None]


def diag_part(m: np.ndarray) -> np.ndarray:
    out = np.zeros_like(m)
    out[..., 0, 0] = m[..., 0, 0]
    out[..., 1, 1] = m[..., 1, 1]
    return out


def offdiag_part(m: np.ndarray) -> np.ndarray:
    return m - diag_part(m)


def diag_matrix(minus: np.ndarray, plus: np.ndarray) -> np.ndarray:
    minus = np.asarray(minus)
    out = np.zeros(minus.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = minus
    out[..., 1, 1] = plus
    return out


def apply(m: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Matrix-vector product over trailing axes: (..., 2, 2) x (..., 2)."""
    return np.einsum('...ab,...b->...a', m, psi)


def from_data(data: np.ndarray, J: int) -> Field:
    """Wrap the meaningful slices `data` (n, P, ...) into a padded Field."""
    return Field(values=pad_slices(np.asarray(data), J), valid=data.shape[0])


def trim(*arrays: np.ndarray) -> Tuple[np.ndarray, ...]:
    """Cut leading axes to the shortest common validity range."""
    n = min(a.shape[0] for a in arrays)
    return tuple(a[:n] for a in arrays)
