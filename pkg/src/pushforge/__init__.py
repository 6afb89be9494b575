"""Exact pushforward analysis and constructive builders for ReLU generative networks."""

from .errors import (FormatError, InputError, InsufficientCarryError, NumericError, PushforgeError,
                     RegionBudgetError)
from .network import (ActivationKind, AffineLayer, Flavor, Network, compose, evaluate, load, parallel,
                      replace_steps, save)
from .regions import PolyhedralRegion, affine_pieces_1d, breakpoints_1d, enumerate_regions

__version__ = "0.1.0"

__all__ = [
    "ActivationKind", "AffineLayer", "Flavor", "Network", "PolyhedralRegion",
    "FormatError", "InputError", "InsufficientCarryError", "NumericError", "PushforgeError",
    "RegionBudgetError", "affine_pieces_1d", "breakpoints_1d", "compose", "enumerate_regions",
    "evaluate", "load", "parallel", "replace_steps", "save",
]
