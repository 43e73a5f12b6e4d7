"""Finite and probabilistic tight frames."""

from .errors import FormatError, FrameLabError, NumericalError
from .frame_core import FiniteFrame, mercedes_benz
from .kernels import BACKEND
from .rng import SeededRng

__version__ = "0.1.0"

__all__ = ["BACKEND", "FiniteFrame", "FormatError", "FrameLabError", "NumericalError",
           "SeededRng", "__version__", "mercedes_benz"]
