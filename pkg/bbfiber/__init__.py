"""
bbfiber
Spatial bang-bang decoupling of photon noise in optical fibers: exact term
elimination checks, segment-by-segment propagation and segment-length bounds.
"""

__version__ = "1.0.0"

from bbfiber.calculus import classify, matrix_check, survival_weight
from bbfiber.controls import ControlSequence, PhaseShifter, BeamSplitter
from bbfiber.exceptions import (
    BBFiberError,
    BoundError,
    ConfigError,
    ModelError,
    ParseError,
    PropagationError,
    SequenceError,
)
from bbfiber.hamiltonian import FiberModel
from bbfiber.monomials import Monomial
from bbfiber.parser import LiteralParser

__all__ = [
    "BeamSplitter",
    "ControlSequence",
    "FiberModel",
    "LiteralParser",
    "Monomial",
    "PhaseShifter",
    "classify",
    "matrix_check",
    "survival_weight",
    "BBFiberError",
    "BoundError",
    "ConfigError",
    "ModelError",
    "ParseError",
    "PropagationError",
    "SequenceError",
]
