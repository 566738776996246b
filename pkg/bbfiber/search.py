"""
Breadth-first search for the shortest cyclic sequences over a control alphabet.

A search node is a cumulative pulse C plus the partial averaged weights of all
targets. Two prefixes with the same node have the same futures, so only the
first one reached (shortest, then lexicographically smallest in alphabet
indices) is kept.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from bbfiber import settings
from bbfiber.calculus import EXACT_DENOMINATOR_CAP, cyclotomic_basis, root_exponent
from bbfiber.controls import BeamSplitter, ControlElement, ControlSequence, PhaseShifter
from bbfiber.exceptions import SequenceError
from bbfiber.monomials import Exponents, Monomial, is_total_number, unique_terms
from bbfiber.utils import validate_input_types

logger = logging.getLogger(__name__)

MAX_SEARCH_STEPS = 20
KEY_DECIMALS = 9


@dataclass(frozen=True)
class SearchResult:
    """Minimal-length solutions, one per equivalence class of search nodes."""

    sequences: Tuple[ControlSequence, ...]
    length: Optional[int]
    truncated: bool
    explored_states: int

    @property
    def found(self) -> bool:
        return bool(self.sequences)


class _PhaseAlgebra:
    """Exact nodes for phase-shifter alphabets: angles plus integer coordinates in Z[zeta]."""

    def __init__(
        self,
        targets: Sequence[Monomial],
        alphabet: Sequence[PhaseShifter],
        allow_degenerate: bool,
    ):
        self.targets = targets
        self.alphabet = alphabet
        self.denominator = math.lcm(1, *(e.denominator for e in alphabet))
        self.basis = cyclotomic_basis(self.denominator)
        self.allow_degenerate = allow_degenerate
        self._contributions: Dict[tuple, tuple] = {}

    def identity(self):
        return (Fraction(0), Fraction(0))

    def zero(self):
        return (0,) * (self.basis.degree * len(self.targets))

    def step(self, frame, element: PhaseShifter):
        return ((frame[0] + element.alpha) % 2, (frame[1] + element.beta) % 2)

    def contribution(self, frame) -> tuple:
        cached = self._contributions.get(frame)
        if cached is None:
            shifter = PhaseShifter(*frame)
            parts: List[int] = []
            for m in self.targets:
                phase = shifter.conjugation_phase(m.exponents)
                parts.extend(self.basis.power(root_exponent(phase, self.denominator)))
            cached = tuple(parts)
            self._contributions[frame] = cached
        return cached

    def add(self, sums, contribution):
        return tuple(a + b for a, b in zip(sums, contribution))

    def key(self, frame, sums):
        return (frame, sums)

    def satisfied(self, sums) -> bool:
        width = self.basis.degree
        for index, m in enumerate(self.targets):
            if any(sums[index * width : (index + 1) * width]):
                if not (self.allow_degenerate and m.is_number_diagonal):
                    return False
        return True

    def closed(self, frame) -> bool:
        return frame[0] == 0 and frame[1] == 0


class _MatrixAlgebra:
    """Floating nodes for alphabets with beam splitters: mode matrix plus averaged images."""

    def __init__(self, targets: Sequence[Monomial], alphabet: Sequence[ControlElement]):
        self.targets = targets
        self.alphabet = alphabet
        self._layout: List[Tuple[int, Dict[Exponents, int]]] = []
        offset = 0
        for m in targets:
            keys = _same_degree_keys(m.creation_degree, m.annihilation_degree)
            self._layout.append((offset, {key: i for i, key in enumerate(keys)}))
            offset += len(keys)
        self.width = offset
        self._contributions: Dict[tuple, np.ndarray] = {}

    def identity(self):
        return np.eye(2, dtype=complex)

    def zero(self):
        return np.zeros(self.width, dtype=complex)

    def step(self, frame, element: ControlElement):
        return element.mode_matrix() @ frame

    def contribution(self, frame) -> np.ndarray:
        frame_key = _round(frame)
        cached = self._contributions.get(frame_key)
        if cached is None:
            cached = np.zeros(self.width, dtype=complex)
            for m, (offset, index) in zip(self.targets, self._layout):
                for key, coeff in m.with_weight(1.0).transform(frame).items():
                    cached[offset + index[key]] += coeff
            self._contributions[frame_key] = cached
        return cached

    def add(self, sums, contribution):
        return sums + contribution

    def key(self, frame, sums):
        return (_round(frame), _round(sums))

    def satisfied(self, sums) -> bool:
        for m, (offset, index) in zip(self.targets, self._layout):
            image = {key: sums[offset + i] for key, i in index.items()}
            if all(abs(c) <= 10.0**-KEY_DECIMALS for c in image.values()):
                continue
            if not is_total_number(image, tol=10.0**-KEY_DECIMALS):
                return False
        return True

    def closed(self, frame) -> bool:
        return bool(np.max(np.abs(frame - np.eye(2))) <= 10.0**-KEY_DECIMALS)


def _round(values: np.ndarray) -> tuple:
    flat = np.asarray(values).ravel()
    rounded = np.round(np.concatenate([flat.real, flat.imag]), KEY_DECIMALS) + 0.0
    return tuple(rounded.tolist())


def _same_degree_keys(creation_degree: int, annihilation_degree: int) -> List[Exponents]:
    return [
        (p1, q1, creation_degree - p1, annihilation_degree - q1)
        for p1 in range(creation_degree + 1)
        for q1 in range(annihilation_degree + 1)
    ]


def _check_alphabet(alphabet: Sequence[ControlElement]) -> None:
    if not alphabet:
        raise SequenceError("Search alphabet is empty")
    for element in alphabet:
        if isinstance(element, PhaseShifter):
            denominator = element.denominator
        elif isinstance(element, BeamSplitter):
            denominator = element.theta.denominator
        else:
            raise SequenceError(f"Unsupported alphabet element {element!r}")
        if denominator > EXACT_DENOMINATOR_CAP:
            raise SequenceError(
                f"Alphabet angle denominators must not exceed {EXACT_DENOMINATOR_CAP}, "
                f"got {element.literal}"
            )


@validate_input_types(max_steps=int)
def search_sequences(
    targets: Iterable[Monomial],
    alphabet: Sequence[ControlElement],
    max_steps: int,
    max_states: Optional[int] = None,
    result_cap: Optional[int] = None,
    require_cyclic: bool = True,
    allow_degenerate: bool = False,
) -> SearchResult:
    """
    Shortest sequences over ``alphabet`` that eliminate every target.

    Args:
        targets: Terms to remove; number-diagonal terms count as removed only with
            ``allow_degenerate`` (phase alphabets) or when averaged into c(n1 + n2)
        alphabet: Pulses allowed before each segment
        max_steps: Longest sequence considered, at most 20
        max_states: Node budget; exceeding it stops the search with ``truncated`` set
        result_cap: Maximum number of solutions returned
        require_cyclic: Only accept sequences whose pulses multiply to the identity

    Returns:
        SearchResult, empty when nothing is found within the limits

    Raises:
        SequenceError: If the limits or the alphabet are invalid
    """
    if not 0 <= max_steps <= MAX_SEARCH_STEPS:
        raise SequenceError(f"max_steps must lie in 0..{MAX_SEARCH_STEPS}, got {max_steps}")
    alphabet = tuple(alphabet)
    _check_alphabet(alphabet)
    targets = unique_terms(targets)
    max_states = settings.SEARCH_MAX_STATES if max_states is None else max_states
    result_cap = settings.SEARCH_RESULT_CAP if result_cap is None else result_cap

    if not targets:
        return SearchResult((ControlSequence(),), 0, False, 1)

    if all(isinstance(e, PhaseShifter) for e in alphabet):
        algebra = _PhaseAlgebra(targets, alphabet, allow_degenerate)
    else:
        algebra = _MatrixAlgebra(targets, alphabet)

    start_frame, start_sums = algebra.identity(), algebra.zero()
    frontier = [(start_frame, start_sums, ())]
    seen = {algebra.key(start_frame, start_sums)}
    explored = 1

    for length in range(1, max_steps + 1):
        next_frontier = []
        solutions = []
        solution_nodes = set()
        for frame, sums, path in frontier:
            for index, element in enumerate(alphabet):
                new_frame = algebra.step(frame, element)
                new_sums = algebra.add(sums, algebra.contribution(new_frame))
                node = algebra.key(new_frame, new_sums)
                new_path = path + (index,)
                # a closed, fully averaged path returns to the start node
                if (
                    node not in solution_nodes
                    and algebra.satisfied(new_sums)
                    and (not require_cyclic or algebra.closed(new_frame))
                ):
                    solution_nodes.add(node)
                    solutions.append(new_path)
                if node in seen:
                    continue
                seen.add(node)
                explored += 1
                next_frontier.append((new_frame, new_sums, new_path))
                if explored > max_states:
                    logger.warning(
                        "Search stopped after %d states at length %d", explored, length
                    )
                    return SearchResult(
                        _to_sequences(solutions[:result_cap], alphabet),
                        length if solutions else None,
                        True,
                        explored,
                    )
        if solutions:
            logger.info("Found %d solution(s) of length %d", len(solutions), length)
            return SearchResult(
                _to_sequences(solutions[:result_cap], alphabet), length, False, explored
            )
        frontier = next_frontier
        logger.debug("Length %d: %d new states", length, len(frontier))

    return SearchResult((), None, False, explored)


def _to_sequences(paths, alphabet) -> Tuple[ControlSequence, ...]:
    return tuple(ControlSequence(tuple(alphabet[i] for i in path)) for path in paths)
