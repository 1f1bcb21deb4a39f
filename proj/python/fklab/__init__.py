"""Deficits, asymmetries and stability checks for planar star-shaped domains."""

from ._fklab import *  # noqa: F401,F403
from ._fklab import (  # noqa: F401
    CSV_SCHEMA,
    Error,
    InvalidInput,
    NotStarShaped,
    NumericalFailure,
)

__version__ = "0.1.0"
