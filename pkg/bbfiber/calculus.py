"""
Survival of monomial terms under a bang-bang period.

For a period with cumulative pulses C_1..C_m the averaged term is
sum_s C_s^dag M C_s. Phase shifters only multiply a monomial by a root of
unity, so the sum is decided exactly in Z[zeta]; sequences containing beam
splitters are averaged in the monomial basis instead.
"""

import functools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from sympy import Poly, cyclotomic_poly, symbols

from bbfiber import settings
from bbfiber.controls import QUARTER, ControlSequence, PhaseShifter
from bbfiber.exceptions import SequenceError
from bbfiber.fock import FockSpace
from bbfiber.monomials import Exponents, Monomial, is_total_number, unique_terms

logger = logging.getLogger(__name__)

# Angles with larger denominators fall back to high-precision floats
EXACT_DENOMINATOR_CAP = 8
FLOAT_ZERO_TOL = 1e-12
MPMATH_DPS = 30


class CyclotomicBasis:
    """
    Integer coordinates of zeta^k, zeta = exp(i pi / D), in the power basis of Z[zeta].

    A sum of roots of unity vanishes exactly when its coordinate vector is zero.
    """

    def __init__(self, denominator: int):
        self.denominator = denominator
        self.order = 2 * denominator
        if self.order & (self.order - 1) == 0:
            # zeta^D = -1
            self.degree = denominator
            self._powers = [
                self._unit(k) if k < denominator else self._neg_unit(k - denominator)
                for k in range(self.order)
            ]
        else:
            x = symbols("x")
            modulus = cyclotomic_poly(self.order, x, polys=True)
            self.degree = modulus.degree()
            self._powers = []
            for k in range(self.order):
                remainder = Poly(x**k, x).rem(modulus)
                coeffs = [int(c) for c in reversed(remainder.all_coeffs())]
                coeffs += [0] * (self.degree - len(coeffs))
                self._powers.append(tuple(coeffs))

    def _unit(self, k: int) -> Tuple[int, ...]:
        return tuple(1 if i == k else 0 for i in range(self.degree))

    def _neg_unit(self, k: int) -> Tuple[int, ...]:
        return tuple(-1 if i == k else 0 for i in range(self.degree))

    def power(self, k: int) -> Tuple[int, ...]:
        return self._powers[k % self.order]

    def reduce(self, counts: Sequence[int]) -> Tuple[int, ...]:
        """Coordinates of sum_k counts[k] zeta^k."""
        total = [0] * self.degree
        for k, count in enumerate(counts):
            if count:
                for i, c in enumerate(self.power(k)):
                    total[i] += count * c
        return tuple(total)


@functools.lru_cache(maxsize=None)
def cyclotomic_basis(denominator: int) -> CyclotomicBasis:
    return CyclotomicBasis(denominator)


def root_exponent(phase: Fraction, denominator: int) -> int:
    """k with exp(-i pi phase) = zeta^k, zeta = exp(i pi / D)."""
    k = -phase * denominator
    if k.denominator != 1:
        raise SequenceError(f"Phase {phase} is not a multiple of 1/{denominator}")
    return int(k) % (2 * denominator)


def phase_of(shifter: PhaseShifter, m: Monomial) -> Fraction:
    """
    Conjugation phase phi with P^dag m P = e^{-i pi phi} m.

    phi is in units of pi and reduced to [0, 2), so a sign flip reads as 1.
    """
    if not isinstance(shifter, PhaseShifter):
        raise SequenceError(f"phase_of needs a phase shifter, got {shifter!r}")
    return shifter.conjugation_phase(m.exponents)


@dataclass(frozen=True)
class SurvivalWeight:
    """Averaged weight of one term over one period."""

    value: complex
    eliminated: bool
    exact: Optional[Tuple[int, ...]] = None
    order: Optional[int] = None
    image: Optional[Dict[Exponents, complex]] = field(default=None, compare=False)
    harmless: bool = False
    degenerate_harmless: bool = False
    warnings: Tuple[str, ...] = ()

    @property
    def gaussian(self) -> Optional[Tuple[int, int]]:
        """(re, im) as integers when every phase is a multiple of pi/2."""
        if self.exact is None or self.order not in (2, 4):
            return None
        if self.order == 2:
            return (self.exact[0], 0)
        return (self.exact[0], self.exact[1])

    @property
    def magnitude(self) -> float:
        return abs(self.value)


def _warn_if_open(sequence: ControlSequence) -> Tuple[str, ...]:
    if sequence.is_cyclic():
        return ()
    message = f"sequence {sequence} is not cyclic; its averaged terms describe one period only"
    logger.warning(message)
    return (message,)


def survival_weight(sequence: ControlSequence, m: Monomial) -> SurvivalWeight:
    """
    Averaged weight of ``m`` over one period of ``sequence``.

    Phase-shifter sequences give sum_s C_s^dag M C_s = w M with w decided exactly;
    sequences with beam splitters report the averaged image in the monomial basis.

    The scalar coefficient of ``m`` does not enter; only its exponents do.

    Raises:
        SequenceError: If the sequence has no segments
    """
    if sequence.num_segments == 0:
        raise SequenceError("survival_weight needs at least one segment")
    warnings = _warn_if_open(sequence)
    unit = m.with_weight(1.0)

    if not sequence.is_phase_only:
        image: Dict[Exponents, complex] = {}
        for matrix in sequence.cumulative_mode_matrices():
            for key, coeff in unit.transform(matrix).items():
                image[key] = image.get(key, 0.0) + coeff
        image = {key: coeff for key, coeff in image.items() if abs(coeff) > FLOAT_ZERO_TOL}
        return SurvivalWeight(
            value=complex(image.get(m.exponents, 0.0)),
            eliminated=not image,
            image=image,
            harmless=is_total_number(image),
            warnings=warnings,
        )

    cumulative = sequence.cumulative_shifters()
    phases = [c.conjugation_phase(m.exponents) for c in cumulative]
    with mpmath.workdps(MPMATH_DPS):
        total = mpmath.fsum(
            mpmath.expjpi(-mpmath.mpf(p.numerator) / p.denominator) for p in phases
        )
        value = complex(total)

    control_denominator = math.lcm(*(c.denominator for c in cumulative))
    if control_denominator > EXACT_DENOMINATOR_CAP:
        logger.info("Angles with denominator %d evaluated numerically", control_denominator)
        eliminated = abs(value) < FLOAT_ZERO_TOL
        return SurvivalWeight(
            value=value,
            eliminated=eliminated,
            degenerate_harmless=m.is_number_diagonal and not eliminated,
            warnings=warnings,
        )

    D = math.lcm(1, *(p.denominator for p in phases))
    basis = cyclotomic_basis(D)
    counts = [0] * basis.order
    for p in phases:
        counts[root_exponent(p, D)] += 1
    exact = basis.reduce(counts)
    eliminated = not any(exact)
    return SurvivalWeight(
        value=0j if eliminated else value,
        eliminated=eliminated,
        exact=exact,
        order=basis.order,
        degenerate_harmless=m.is_number_diagonal and not eliminated,
        warnings=warnings,
    )


@dataclass(frozen=True)
class TermVerdict:
    term: Monomial
    weight: SurvivalWeight

    @property
    def status(self) -> str:
        if self.weight.eliminated:
            return "eliminated"
        if self.weight.harmless:
            return "harmless"
        if self.weight.degenerate_harmless:
            return "degenerate-harmless"
        return "survives"


@dataclass(frozen=True)
class ClassificationReport:
    """Per-term verdicts for one sequence, in deterministic term order."""

    sequence: ControlSequence
    verdicts: Tuple[TermVerdict, ...]
    cyclic: bool

    @property
    def eliminated(self) -> Tuple[Monomial, ...]:
        return tuple(v.term for v in self.verdicts if v.weight.eliminated)

    @property
    def surviving(self) -> Tuple[Tuple[Monomial, SurvivalWeight], ...]:
        return tuple((v.term, v.weight) for v in self.verdicts if not v.weight.eliminated)

    def passed(self, allow_degenerate: bool = False) -> bool:
        """True when no term survives in a harmful form."""
        allowed = {"eliminated", "harmless"}
        if allow_degenerate:
            allowed.add("degenerate-harmless")
        return all(v.status in allowed for v in self.verdicts)


def classify(sequence: ControlSequence, terms: Iterable[Monomial]) -> ClassificationReport:
    verdicts = tuple(TermVerdict(m, survival_weight(sequence, m)) for m in unique_terms(terms))
    return ClassificationReport(sequence, verdicts, sequence.is_cyclic())


def safe_sector_projector(space: FockSpace, modes: Tuple[int, int] = (0, 1)) -> np.ndarray:
    """Projector onto n1 + n2 <= d - 1, where truncated passive controls act exactly."""
    table = space.occupation_table()
    total = table[:, modes[0]] + table[:, modes[1]]
    return np.diag((total <= space.dim_per_mode - 1).astype(float))


def default_check_space(m: Monomial) -> FockSpace:
    needed = max(m.creation_degree, m.annihilation_degree) + 1
    return FockSpace(2, max(settings.DIM_PER_MODE, needed))


def matrix_check(
    sequence: ControlSequence, m: Monomial, space: Optional[FockSpace] = None
) -> float:
    """
    ||P (sum_s C_s^dag M C_s) P|| with explicit Fock matrices, P the safe-sector projector.

    Serves as an independent oracle for ``survival_weight``.
    """
    if sequence.num_segments == 0:
        raise SequenceError("matrix_check needs at least one segment")
    space = space or default_check_space(m)
    operator = m.with_weight(1.0).matrix(space).matrix
    projector = safe_sector_projector(space)
    if np.max(np.abs(projector @ operator @ projector)) == 0.0:
        logger.warning("Term %s vanishes on the safe sector of %s", m.label, space)

    total = np.zeros_like(operator)
    cumulative = np.eye(space.total_dim, dtype=complex)
    for control in sequence.controls:
        if control is not None:
            cumulative = control.unitary(space).matrix @ cumulative
        total += cumulative.conj().T @ operator @ cumulative
    return float(np.linalg.norm(projector @ total @ projector, 2))


def projected_norm(m: Monomial, space: Optional[FockSpace] = None) -> float:
    space = space or default_check_space(m)
    projector = safe_sector_projector(space)
    operator = m.with_weight(1.0).matrix(space).matrix
    return float(np.linalg.norm(projector @ operator @ projector, 2))


def parity_eliminated(m: Monomial) -> bool:
    """Odd-degree terms anticommute with the global parity and vanish under [2,Pi,1,Pi]."""
    return m.degree % 2 == 1


def alternation_sequence(m: Monomial) -> ControlSequence:
    """
    Cyclic single-mode alternation that removes ``m``.

    With delta = r - s (or k - l), the shifter exp(-i pi n_j / delta) flips the sign of
    ``m`` at every step; 2|delta| steps close the cycle. For b1^dag^2 b2^2 this is
    exp(-i pi/2 n1) applied four times.

    Raises:
        SequenceError: If ``m`` is number-diagonal, which no phase shifter can remove
    """
    delta_first = m.r - m.s
    delta_second = m.k - m.l
    if delta_first:
        shifter = PhaseShifter(Fraction(-1, delta_first), 0)
        steps = 2 * abs(delta_first)
    elif delta_second:
        shifter = PhaseShifter(0, Fraction(-1, delta_second))
        steps = 2 * abs(delta_second)
    else:
        raise SequenceError(f"{m.label} commutes with every phase shifter")
    if shifter == QUARTER:
        shifter = QUARTER
    return ControlSequence((shifter,) * steps, name=f"alternation[{m.literal}]")


def cumulative_phases(sequence: ControlSequence, m: Monomial) -> List[Fraction]:
    """Per-segment conjugation phases of ``m``; useful for reports."""
    return [c.conjugation_phase(m.exponents) for c in sequence.cumulative_shifters()]
