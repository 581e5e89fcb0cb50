"""Two-component quantum walk on the periodic lattice, in the original basis b_A.

One step is Ψ_{j+1} = U(θ_j) T Ψ_j with (TΨ)_{j,p} = (ψ^L_{j,p+1}, ψ^R_{j,p-1}).
The stroboscopic two-step map is the composition of two steps.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import pandas as pd

from .errors import ConfigError, FieldRangeError, WalkOverflowError
from .lattice import Basis, Field, Lattice, SpinorField, apply, pad_slices, require_same_basis, spinor_field
from .theta import ThetaSpec, theta_slice

logger = logging.getLogger(__name__)

ThetaSource = Union[ThetaSpec, Field]


@dataclass(frozen=True)
class SpinorSlice:
    """Wave function on one time slice: values has shape (P, 2)."""
    values: np.ndarray
    j: int
    basis: Basis = Basis.ORIGINAL

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.ndim != 2 or values.shape[1] != 2:
            raise FieldRangeError(f"a spinor slice needs shape (P, 2), got {values.shape}")
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    @property
    def P(self) -> int:
        return self.values.shape[0]

    def norm(self) -> float:
        return norm(self.values)


def coin_matrix(theta: Union[float, np.ndarray]) -> np.ndarray:
    """U(θ) = [[-cos θ, i sin θ], [-i sin θ, cos θ]], vectorized over θ."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = -c
    out[..., 0, 1] = 1j * s
    out[..., 1, 0] = -1j * s
    out[..., 1, 1] = c
    return out


def inner(psi: np.ndarray, phi: np.ndarray) -> complex:
    """Flat product Σ_{A,p} conj(ψ^A_p) φ^A_p."""
    return complex(np.vdot(psi, phi))


def norm(psi: np.ndarray) -> float:
    return float(np.sqrt(np.vdot(psi, psi).real))


def shift(values: np.ndarray) -> np.ndarray:
    """(TΨ)_p = (ψ^L_{p+1}, ψ^R_{p-1}) with periodic wrap."""
    out = np.empty_like(values)
    out[:, 0] = np.roll(values[:, 0], -1)
    out[:, 1] = np.roll(values[:, 1], 1)
    return out


def _theta_row(theta: ThetaSource, lat: Lattice, j: int) -> np.ndarray:
    if isinstance(theta, Field):
        if not 0 <= j < theta.valid:
            raise FieldRangeError(f"theta slice j={j} outside [0, {theta.valid})")
        return np.asarray(theta.values[j], dtype=float)
    return theta_slice(theta, lat, j)


def _as_slice(psi: Union[SpinorSlice, np.ndarray], j: int) -> SpinorSlice:
    if isinstance(psi, SpinorSlice):
        return psi
    return SpinorSlice(values=psi, j=j)


def step(psi_j: Union[SpinorSlice, np.ndarray], theta: ThetaSource, lat: Lattice,
         j: Optional[int] = None) -> SpinorSlice:
    """Advance one slice by U(θ_j) T."""
    psi = _as_slice(psi_j, 0 if j is None else j)
    j = psi.j if j is None else j
    require_same_basis(psi.basis, Basis.ORIGINAL)
    if psi.P != lat.P:
        raise FieldRangeError(f"slice has {psi.P} sites, lattice has {lat.P}")
    coin = coin_matrix(_theta_row(theta, lat, j))
    return SpinorSlice(values=apply(coin, shift(psi.values)), j=j + 1)


def two_step(psi_j: Union[SpinorSlice, np.ndarray], theta: ThetaSource, lat: Lattice,
             j: Optional[int] = None) -> SpinorSlice:
    """Stroboscopic map j -> j+2, computed as step applied twice."""
    first = step(psi_j, theta, lat, j)
    return step(first, theta, lat, first.j)


@dataclass(frozen=True)
class WalkHistory:
    field: SpinorField
    norms: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.field.valid - 1

    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - self.norms[0])))

    def to_frame(self) -> pd.DataFrame:
        """Long-format table j, p, component, re, im of the stored slices."""
        data = self.field.data
        n, P = data.shape[:2]
        j, p, a = np.meshgrid(np.arange(n), np.arange(P), [0, 1], indexing='ij')
        return pd.DataFrame({
            'j': j.ravel(),
            'p': p.ravel(),
            'component': np.where(a.ravel() == 0, 'L', 'R'),
            're': data.real.ravel(),
            'im': data.imag.ravel(),
        })


def run(psi_0: Union[SpinorSlice, np.ndarray], theta: ThetaSource, lat: Lattice,
        n_steps: int) -> WalkHistory:
    """Evolve psi_0 for n_steps steps, storing every slice and its norm."""
    if n_steps < 0 or n_steps > lat.J - 1:
        raise WalkOverflowError(f"n_steps={n_steps} needs {n_steps + 1} slices, lattice stores J={lat.J}")
    psi = _as_slice(psi_0, 0)
    require_same_basis(psi.basis, Basis.ORIGINAL)
    slices = [psi.values]
    for _ in range(n_steps):
        psi = step(psi, theta, lat)
        slices.append(psi.values)
    data = np.stack(slices)
    norms = np.sqrt(np.sum(np.abs(data) ** 2, axis=(1, 2)))
    logger.debug("walk ran %d steps on %s, norm drift %.3e", n_steps, lat.describe(),
                 float(np.max(np.abs(norms - norms[0]))))
    history = spinor_field(lat, pad_slices(data, lat.J), valid=n_steps + 1)
    return WalkHistory(field=history, norms=norms)


def light_cone(P: int, p0: int, n_steps: int) -> np.ndarray:
    """Sites within periodic distance n_steps of p0."""
    d = np.abs((np.arange(P) - p0 + P // 2) % P - P // 2)
    return d <= n_steps


# --- initial states (unit flat norm) ---

def _normalized(values: np.ndarray, j: int = 0) -> SpinorSlice:
    n = norm(values)
    if not n > 0:
        raise ConfigError(['initial: state has zero norm'])
    return SpinorSlice(values=values / n, j=j)


def point_state(lat: Lattice, p: int = 0, component: str = 'L') -> SpinorSlice:
    values = np.zeros((lat.P, 2), dtype=complex)
    values[p % lat.P, 0 if component == 'L' else 1] = 1.0
    return SpinorSlice(values=values, j=0)


def gaussian_state(lat: Lattice, center: Optional[float] = None, width: float = 4.0,
                   momentum: float = 0.0, left: complex = 1.0, right: complex = 1j) -> SpinorSlice:
    """Gaussian packet in site units times the fixed internal state (left, right)."""
    center = lat.P / 2 if center is None else center
    p = np.arange(lat.P)
    envelope = np.exp(-((p - center) / width) ** 2 / 2) * np.exp(1j * momentum * p)
    return _normalized(envelope[:, None] * np.array([left, right], dtype=complex))


def uniform_state(lat: Lattice) -> SpinorSlice:
    return _normalized(np.ones((lat.P, 2), dtype=complex))


def random_state(lat: Lattice, seed: int = 0) -> SpinorSlice:
    rng = np.random.RandomState(seed)
    values = rng.normal(size=(lat.P, 2)) + 1j * rng.normal(size=(lat.P, 2))
    return _normalized(values)


def state_from_file(path: str, lat: Lattice) -> SpinorSlice:
    """Read a CSV with columns p, re_L, im_L, re_R, im_R (one row per site)."""
    try:
        df = pd.read_csv(path, comment='#')
    except (OSError, ValueError) as exc:
        raise ConfigError([f"initial.path: cannot read {path}: {exc}"]) from None
    missing = {'p', 're_L', 'im_L', 're_R', 'im_R'} - set(df.columns)
    if missing:
        raise ConfigError([f"initial.path: {path} is missing columns {sorted(missing)}"])
    if sorted(df['p'].tolist()) != list(range(lat.P)):
        raise ConfigError([f"initial.path: {path} needs one row for every p in [0, {lat.P})"])
    amplitudes = df[['re_L', 'im_L', 're_R', 'im_R']].to_numpy()
    if not np.issubdtype(amplitudes.dtype, np.number) or not np.all(np.isfinite(amplitudes)):
        raise ConfigError([f"initial.path: {path} has non-numeric or non-finite amplitudes"])
    df = df.sort_values('p')
    values = np.stack([df['re_L'] + 1j * df['im_L'], df['re_R'] + 1j * df['im_R']], axis=1)
    return _normalized(values.astype(complex))
