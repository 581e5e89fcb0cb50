"""dqw_geom package: a two-step quantum walk and the discrete geometry it carries.

This package provides a stable import path `dqw_geom.<module>` for the
project: lattice and fields, the θ expression language, the walk, discrete
derivatives, geometry, spin connection, Lorentz boosts, curvature, and the
configuration and run modes used by the command-line driver.
"""

from . import errors as errors
from . import lattice as lattice
from . import theta as theta
from . import walk as walk
from . import calculus as calculus
from . import geometry as geometry
from . import connection as connection
from . import lorentz as lorentz
from . import curvature as curvature
from . import config as config
from . import runner as runner

__all__ = [
    'errors',
    'lattice',
    'theta',
    'walk',
    'calculus',
    'geometry',
    'connection',
    'lorentz',
    'curvature',
    'config',
    'runner',
]
