"""
Passive control elements and bang-bang control sequences.

Angles are exact fractions in units of pi. A phase shifter P(a, b) is
exp(i pi (a n1 + b n2)); a beam splitter BS(t) is exp(2 pi t (b1^dag b2 - b2^dag b1)).
Every element is described by its mode matrix R, defined through
C^dag b_i C = sum_j R[i, j] b_j, so a product P Q has mode matrix R_P R_Q.

A sequence literal such as [2,Pi,1,Pi] is read right to left: the rightmost
element acts first, then segment 1, and so on.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from bbfiber.exceptions import SequenceError
from bbfiber.fock import (
    FockOperator,
    FockSpace,
    annihilation,
    creation,
    identity,
    matrix_exponential,
)

logger = logging.getLogger(__name__)

Angle = Union[Fraction, int, str, float]

CYCLIC_TOL = 1e-12


def to_angle(value: Angle, modulus: int = 2) -> Fraction:
    """Parse an angle in units of pi and reduce it to [0, modulus)."""
    try:
        if isinstance(value, float):
            angle = Fraction(str(value))
        else:
            angle = Fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise SequenceError(f"Invalid angle {value!r}: {str(e)}") from e
    return angle % modulus


def unit_roots(denominator: int) -> np.ndarray:
    """exp(i pi j / D) for j = 0..2D-1, exact when 2D divides 4."""
    if denominator <= 2:
        exact = np.array([1, 1j, -1, -1j], dtype=complex)
        return exact[:: 2 // denominator] if denominator == 1 else exact
    return np.exp(1j * np.pi * np.arange(2 * denominator) / denominator)


def exp_i_pi(angle: Fraction) -> complex:
    """exp(i pi angle), exact for multiples of 1/2."""
    angle = Fraction(angle) % 2
    if (2 * angle).denominator == 1:
        return complex(unit_roots(2)[int(2 * angle)])
    return complex(np.exp(1j * np.pi * float(angle)))


class ControlElement:
    """Base class for instantaneous passive controls acting on modes 1 and 2."""

    name: Optional[str] = None

    def mode_matrix(self) -> np.ndarray:
        raise NotImplementedError

    def unitary(self, space: FockSpace, modes: Tuple[int, int] = (0, 1)) -> FockOperator:
        raise NotImplementedError

    @property
    def literal(self) -> str:
        raise NotImplementedError

    @property
    def is_phase_shifter(self) -> bool:
        return False

    def inverse(self) -> "ControlElement":
        raise NotImplementedError

    def __mul__(self, other: "ControlElement") -> "ControlElement":
        """Operator product: ``other`` acts first."""
        if not isinstance(other, ControlElement):
            return NotImplemented
        return ComposedControl((self, other))

    def __repr__(self) -> str:
        return self.literal


@dataclass(frozen=True, repr=False)
class PhaseShifter(ControlElement):
    """exp(i pi (alpha n1 + beta n2)) with alpha, beta kept modulo 2."""

    alpha: Fraction = Fraction(0)
    beta: Fraction = Fraction(0)
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", to_angle(self.alpha))
        object.__setattr__(self, "beta", to_angle(self.beta))

    @property
    def is_phase_shifter(self) -> bool:
        return True

    @property
    def angles(self) -> Tuple[Fraction, Fraction]:
        return (self.alpha, self.beta)

    @property
    def denominator(self) -> int:
        return math.lcm(self.alpha.denominator, self.beta.denominator)

    @property
    def is_identity(self) -> bool:
        return self.alpha == 0 and self.beta == 0

    @property
    def literal(self) -> str:
        if self.name:
            return self.name
        return f"P({self.alpha},{self.beta})"

    def conjugation_phase(self, exponents: Sequence[int]) -> Fraction:
        """phi with P^dag m P = exp(-i pi phi) m, reduced to [0, 2)."""
        r, s, k, l = exponents  # noqa: E741
        return ((r - s) * self.alpha + (k - l) * self.beta) % 2

    def mode_matrix(self) -> np.ndarray:
        return np.diag([exp_i_pi(self.alpha), exp_i_pi(self.beta)])

    def unitary(self, space: FockSpace, modes: Tuple[int, int] = (0, 1)) -> FockOperator:
        first, second = modes
        space.check_mode(first)
        space.check_mode(second)
        table = space.occupation_table()
        D = self.denominator
        powers = (
            int(self.alpha * D) * table[:, first] + int(self.beta * D) * table[:, second]
        ) % (2 * D)
        diagonal = unit_roots(D)[powers]
        return FockOperator(space, np.diag(diagonal), unitary=True)

    def inverse(self) -> "PhaseShifter":
        return PhaseShifter(-self.alpha, -self.beta)

    def __mul__(self, other: ControlElement) -> ControlElement:
        if isinstance(other, PhaseShifter):
            name = None
            if self.name and other.name:
                candidate = self.name + other.name
                if candidate in NAMED_ELEMENTS:
                    name = candidate
            return PhaseShifter(self.alpha + other.alpha, self.beta + other.beta, name=name)
        return super().__mul__(other)


@dataclass(frozen=True, repr=False)
class BeamSplitter(ControlElement):
    """exp(2 pi theta (b1^dag b2 - b2^dag b1)); theta = 1/4 swaps the modes up to sign."""

    theta: Fraction = Fraction(1, 4)
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "theta", to_angle(self.theta, modulus=1))

    @property
    def literal(self) -> str:
        if self.name:
            return self.name
        return f"BS({self.theta})"

    def mode_matrix(self) -> np.ndarray:
        c = exp_i_pi(2 * self.theta)
        cos, sin = c.real, c.imag
        return np.array([[cos, sin], [-sin, cos]], dtype=complex)

    def unitary(self, space: FockSpace, modes: Tuple[int, int] = (0, 1)) -> FockOperator:
        first, second = modes
        hop = creation(space, first) @ annihilation(space, second)
        # K = i (b1^dag b2 - b2^dag b1) is Hermitian; U = exp(-i 2 pi theta K)
        generator = FockOperator(space, 1j * (hop.matrix - hop.matrix.conj().T), hermitian=True)
        return matrix_exponential(generator, -2j * np.pi * float(self.theta))

    def inverse(self) -> "BeamSplitter":
        return BeamSplitter(-self.theta)

    def __mul__(self, other: ControlElement) -> ControlElement:
        if isinstance(other, BeamSplitter):
            return BeamSplitter(self.theta + other.theta)
        return super().__mul__(other)


@dataclass(frozen=True, repr=False)
class ComposedControl(ControlElement):
    """Product factors[0] factors[1] ...; the last factor acts first."""

    factors: Tuple[ControlElement, ...]

    @property
    def literal(self) -> str:
        return "*".join(f.literal for f in self.factors)

    def mode_matrix(self) -> np.ndarray:
        result = np.eye(2, dtype=complex)
        for factor in self.factors:
            result = result @ factor.mode_matrix()
        return result

    def unitary(self, space: FockSpace, modes: Tuple[int, int] = (0, 1)) -> FockOperator:
        result = identity(space)
        for factor in self.factors:
            result = result @ factor.unitary(space, modes)
        return FockOperator(space, result.matrix, unitary=True)

    def inverse(self) -> "ComposedControl":
        return ComposedControl(tuple(f.inverse() for f in reversed(self.factors)))

    def __mul__(self, other: ControlElement) -> ControlElement:
        if isinstance(other, ComposedControl):
            return ComposedControl(self.factors + other.factors)
        if isinstance(other, ControlElement):
            return ComposedControl(self.factors + (other,))
        return NotImplemented


IDENTITY = PhaseShifter(0, 0, name="I")
PI = PhaseShifter(1, 1, name="Pi")
PI1 = PhaseShifter(1, 0, name="Pi1")
PI2 = PhaseShifter(0, 1, name="Pi2")
GAMMA = PhaseShifter(Fraction(1, 2), Fraction(3, 2), name="G")
GAMMA_DAG = PhaseShifter(Fraction(3, 2), Fraction(1, 2), name="Gd")
PI_GAMMA = PhaseShifter(Fraction(3, 2), Fraction(1, 2), name="PiG")
PI_GAMMA_DAG = PhaseShifter(Fraction(1, 2), Fraction(3, 2), name="PiGd")
PI_GAMMA_PI1 = PhaseShifter(Fraction(1, 2), Fraction(1, 2), name="PiGPi1")
# exp(-i pi/2 n1)
QUARTER = PhaseShifter(Fraction(-1, 2), 0, name="Q")
SWAP = BeamSplitter(Fraction(1, 4), name="BS")

NAMED_ELEMENTS = {
    e.name: e
    for e in (
        IDENTITY,
        PI,
        PI1,
        PI2,
        GAMMA,
        GAMMA_DAG,
        PI_GAMMA,
        PI_GAMMA_DAG,
        PI_GAMMA_PI1,
        QUARTER,
        SWAP,
    )
}


@dataclass(frozen=True)
class ControlSequence:
    """
    One period of a bang-bang schedule.

    ``controls[i]`` is applied right before segment i+1 (None means no pulse);
    ``trailing`` is applied after the last segment of the period.
    """

    controls: Tuple[Optional[ControlElement], ...] = ()
    trailing: Optional[ControlElement] = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(self.controls))
        for element in self.controls + (self.trailing,):
            if element is not None and not isinstance(element, ControlElement):
                raise SequenceError(f"Not a control element: {element!r}")

    @classmethod
    def from_items(
        cls, items: Sequence[Union[int, ControlElement]], name: str = ""
    ) -> "ControlSequence":
        """
        Build from literal order, e.g. [2, PI, 1, PI].

        Raises:
            SequenceError: If segment labels are not m, m-1, ..., 1
        """
        labels = [item for item in items if isinstance(item, int) and not isinstance(item, bool)]
        expected = list(range(len(labels), 0, -1))
        if labels != expected:
            raise SequenceError(
                f"Segment labels must run {expected} from left to right, got {labels}"
            )
        parts: List[Union[str, ControlElement]] = []
        for item in items:
            if isinstance(item, ControlElement):
                parts.append(item)
            elif isinstance(item, int) and not isinstance(item, bool):
                parts.append("segment")
            else:
                raise SequenceError(f"Unexpected sequence item {item!r}")
        return cls._from_application_order(list(reversed(parts)), name)

    @classmethod
    def _from_application_order(cls, parts: list, name: str = "") -> "ControlSequence":
        controls: List[Optional[ControlElement]] = []
        pending: Optional[ControlElement] = None
        for part in parts:
            if isinstance(part, ControlElement):
                pending = part if pending is None else part * pending
            else:
                controls.append(pending)
                pending = None
        return cls(tuple(controls), pending, name)

    def application_order(self) -> list:
        parts: list = []
        for control in self.controls:
            if control is not None:
                parts.append(control)
            parts.append("segment")
        if self.trailing is not None:
            parts.append(self.trailing)
        return parts

    @property
    def num_segments(self) -> int:
        return len(self.controls)

    @property
    def elements(self) -> Tuple[ControlElement, ...]:
        found = [c for c in self.controls if c is not None]
        if self.trailing is not None:
            found.append(self.trailing)
        return tuple(found)

    @property
    def is_phase_only(self) -> bool:
        return all(e.is_phase_shifter for e in self.elements)

    @property
    def literal(self) -> str:
        items = []
        if self.trailing is not None:
            items.append(self.trailing.literal)
        for index in range(self.num_segments, 0, -1):
            items.append(str(index))
            control = self.controls[index - 1]
            if control is not None:
                items.append(control.literal)
        return "[" + ",".join(items) + "]"

    def cumulative_shifters(self) -> List[PhaseShifter]:
        """C_s = P_s ... P_1 for every segment s (phase-shifter sequences only)."""
        if not self.is_phase_only:
            raise SequenceError("cumulative_shifters needs a phase-shifter-only sequence")
        current = IDENTITY
        result = []
        for control in self.controls:
            if control is not None:
                current = control * current
            result.append(PhaseShifter(current.alpha, current.beta))
        return result

    def cumulative_mode_matrices(self) -> List[np.ndarray]:
        current = np.eye(2, dtype=complex)
        result = []
        for control in self.controls:
            if control is not None:
                current = control.mode_matrix() @ current
            result.append(current)
        return result

    def period_mode_matrix(self) -> np.ndarray:
        total = np.eye(2, dtype=complex)
        for element in self.application_order():
            if isinstance(element, ControlElement):
                total = element.mode_matrix() @ total
        return total

    def is_cyclic(self) -> bool:
        """True when the full period of pulses multiplies to the identity."""
        if self.is_phase_only:
            total = IDENTITY
            for element in self.elements:
                total = element * total
            return total.is_identity
        deviation = np.max(np.abs(self.period_mode_matrix() - np.eye(2)))
        return bool(deviation <= CYCLIC_TOL)

    def period_unitary(self, space: FockSpace, modes: Tuple[int, int] = (0, 1)) -> FockOperator:
        total = identity(space)
        for element in self.elements:
            total = element.unitary(space, modes) @ total
        return total

    def __str__(self) -> str:
        return self.name or self.literal


def compose(*parts: Union[ControlSequence, ControlElement], name: str = "") -> ControlSequence:
    """
    Concatenate sequences and single elements given in literal (left to right) order.

    Adjacent elements fuse into one pulse, so compose(OMEGA_12, GAMMA_DAG, OMEGA_12, GAMMA)
    yields [4,Pi,3,PiGd,2,Pi,1,PiG].
    """
    flat: list = []
    for part in reversed(parts):
        if isinstance(part, ControlSequence):
            flat.extend(part.application_order())
        elif isinstance(part, ControlElement):
            flat.append(part)
        else:
            raise SequenceError(f"Cannot compose {part!r}")
    return ControlSequence._from_application_order(flat, name)


OMEGA_12 = ControlSequence((PI, PI), name="omega12")
OMEGA_1234 = compose(OMEGA_12, GAMMA_DAG, OMEGA_12, GAMMA, name="omega1234")
EIGHT_STEP = compose(OMEGA_1234, PI1, OMEGA_1234, PI1, name="eightstep")
SIXTEEN_STEP = compose(SWAP.inverse(), EIGHT_STEP, SWAP, EIGHT_STEP, name="sixteenstep")
IDENTITY_SEQUENCE = ControlSequence((IDENTITY, IDENTITY), name="identity")
QUARTER_TURN = ControlSequence((QUARTER,) * 4, name="quarterturn")

NAMED_SEQUENCES = {
    seq.name: seq
    for seq in (OMEGA_12, OMEGA_1234, EIGHT_STEP, SIXTEEN_STEP, IDENTITY_SEQUENCE, QUARTER_TURN)
}
