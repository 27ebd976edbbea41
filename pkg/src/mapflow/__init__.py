"""Continuous-time embeddings of one-dimensional maps.

A map ``x -> f(x)`` is replaced by the ODE obtained from truncating its
Taylor expansion in time at order ``N``. The subpackages build the system,
decide stability of its equilibria exactly, propagate the linearization,
integrate and classify the flow, and sweep parameters.
"""
from .dynamics import *  # noqa: F401,F403
from .dynamics import __all__ as _dyn
from .embedding import *  # noqa: F401,F403
from .embedding import __all__ as _emb
from .errors import (
    DegenerateSpectrum,
    DomainError,
    InconclusiveWindow,
    MapflowError,
    NumericError,
    TrajectoryDiverged,
)
from .linear_solution import *  # noqa: F401,F403
from .linear_solution import __all__ as _lin
from .maps import *  # noqa: F401,F403
from .maps import __all__ as _maps
from .stability import *  # noqa: F401,F403
from .stability import __all__ as _stab
from .sweep import *  # noqa: F401,F403
from .sweep import __all__ as _sweep

__version__ = "0.1.0"

__all__ = [
    *_maps, *_emb, *_stab, *_lin, *_dyn, *_sweep,
    "MapflowError", "DomainError", "NumericError",
    "DegenerateSpectrum", "InconclusiveWindow", "TrajectoryDiverged",
]
