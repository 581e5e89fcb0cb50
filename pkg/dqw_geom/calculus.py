"""Discrete derivatives of the two-step walk.

    (D_j f)_{j,p}  = (f_{j+2,p} - f_{j,p}) / 2
    (D_p f)_{j,p}  = (f_{j,p+2} - f_{j,p-2}) / 4
    (D_pp f)_{j,p} = (f_{j,p+2} + f_{j,p-2} - 2 f_{j,p}) / 4

The lower-case functions act on raw data arrays whose leading axis is time
and second axis is space; trailing axes are carried entrywise. D_j drops the
last two slices, the space operators wrap periodically. The `d_*` functions
do the same on Field objects and keep their validity ranges.
"""
from dataclasses import replace
from typing import Tuple

import numpy as np

from .errors import FieldRangeError
from .lattice import Field, pad_slices


def dj(a: np.ndarray) -> np.ndarray:
    if a.shape[0] < 3:
        raise FieldRangeError(f"D_j needs at least 3 slices, got {a.shape[0]}")
    return 0.5 * (a[2:] - a[:-2])


def dp(a: np.ndarray) -> np.ndarray:
    return 0.25 * (np.roll(a, -2, axis=1) - np.roll(a, 2, axis=1))


def dpp(a: np.ndarray) -> np.ndarray:
    return 0.25 * (np.roll(a, -2, axis=1) + np.roll(a, 2, axis=1) - 2 * a)


def d_j(f: Field) -> Field:
    return replace(f, values=pad_slices(dj(f.data), f.J), valid=f.valid - 2)


def d_p(f: Field) -> Field:
    return replace(f, values=pad_slices(dp(f.data), f.J), valid=f.valid)


def d_pp(f: Field) -> Field:
    return replace(f, values=pad_slices(dpp(f.data), f.J), valid=f.valid)


def reconstruct(f: Field, dj_f: Field, dp_f: Field, dpp_f: Field) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Invert the stencils: (f_{j+2,p}, f_{j,p+2}, f_{j,p-2}) on their valid slices."""
    n = dj_f.valid
    forward = f.data[:n] + 2 * dj_f.data
    m = min(f.valid, dp_f.valid, dpp_f.valid)
    base, first, second = f.data[:m], dp_f.data[:m], dpp_f.data[:m]
    return forward, base + 2 * first + 2 * second, base - 2 * first + 2 * second
