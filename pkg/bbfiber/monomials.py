"""
Two-mode photon monomials b1^dag^r b1^s b2^dag^k b2^l and the named term sets.
"""

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, Tuple

import numpy as np

from bbfiber import settings
from bbfiber.exceptions import OperatorError
from bbfiber.fock import FockOperator, FockSpace, annihilation, creation, identity

Exponents = Tuple[int, int, int, int]


@dataclass(frozen=True)
class Monomial:
    """Normal-ordered term weight * b1^dag^r b1^s b2^dag^k b2^l."""

    r: int
    s: int
    k: int
    l: int  # noqa: E741
    weight: complex = 1.0

    def __post_init__(self):
        for name, value in zip("rskl", self.exponents):
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 0:
                raise OperatorError(f"Exponent {name} must be a nonnegative integer, got {value!r}")
            if value > settings.EXPONENT_CAP:
                raise OperatorError(
                    f"Exponent {name}={value} exceeds the cap {settings.EXPONENT_CAP}"
                )
        object.__setattr__(self, "weight", complex(self.weight))

    @property
    def exponents(self) -> Exponents:
        return (self.r, self.s, self.k, self.l)

    @property
    def degree(self) -> int:
        return self.r + self.s + self.k + self.l

    @property
    def creation_degree(self) -> int:
        return self.r + self.k

    @property
    def annihilation_degree(self) -> int:
        return self.s + self.l

    @property
    def is_number_diagonal(self) -> bool:
        """True when r == s and k == l; such terms commute with every phase shifter."""
        return self.r == self.s and self.k == self.l

    def sort_key(self) -> tuple:
        return (self.degree,) + tuple(-e for e in self.exponents)

    def adjoint(self) -> "Monomial":
        return Monomial(self.s, self.r, self.l, self.k, self.weight.conjugate())

    def with_weight(self, weight: complex) -> "Monomial":
        return Monomial(self.r, self.s, self.k, self.l, weight)

    @property
    def literal(self) -> str:
        """Text form c(r,k)a(s,l), the grammar read by the parser."""
        return f"c({self.r},{self.k})a({self.s},{self.l})"

    @property
    def label(self) -> str:
        factors = []
        for power, symbol in zip(self.exponents, ("b1^dag", "b1", "b2^dag", "b2")):
            if power == 1:
                factors.append(symbol)
            elif power > 1:
                factors.append(f"({symbol})^{power}")
        return " ".join(factors) if factors else "1"

    def matrix(self, space: FockSpace, modes: Tuple[int, int] = (0, 1)) -> FockOperator:
        """Operator weight * b1^dag^r b1^s b2^dag^k b2^l on ``space``."""
        first, second = modes
        result = identity(space).matrix
        factors = (
            (creation(space, first), self.r),
            (annihilation(space, first), self.s),
            (creation(space, second), self.k),
            (annihilation(space, second), self.l),
        )
        for op, power in factors:
            if power:
                result = result @ np.linalg.matrix_power(op.matrix, power)
        return FockOperator(space, self.weight * result)

    def transform(self, mode_matrix: np.ndarray) -> Dict[Exponents, complex]:
        """
        Image of the term under C^dag (.) C for a passive control C.

        ``mode_matrix`` R encodes C^dag b_i C = sum_j R[i, j] b_j. Creation and
        annihilation parts are expanded separately, so the result stays normal
        ordered and keeps the creation and annihilation degrees.
        """
        mode_matrix = np.asarray(mode_matrix, dtype=complex)
        created = _expand_pair(mode_matrix[0].conj(), self.r, mode_matrix[1].conj(), self.k)
        annihilated = _expand_pair(mode_matrix[0], self.s, mode_matrix[1], self.l)
        image: Dict[Exponents, complex] = defaultdict(complex)
        for (p1, p2), c_create in created.items():
            for (q1, q2), c_annihilate in annihilated.items():
                image[(p1, q1, p2, q2)] += self.weight * c_create * c_annihilate
        return dict(image)


def _expand_pair(
    first_row, first_power: int, second_row, second_power: int
) -> Dict[Tuple[int, int], complex]:
    """
    Expand (u0 x1 + u1 x2)^m (v0 x1 + v1 x2)^n into {(power of x1, power of x2): coeff}.
    """
    terms: Dict[Tuple[int, int], complex] = defaultdict(complex)
    u0, u1 = first_row
    v0, v1 = second_row
    for i in range(first_power + 1):
        cu = math.comb(first_power, i) * u0**i * u1 ** (first_power - i)
        if cu == 0:
            continue
        for j in range(second_power + 1):
            cv = math.comb(second_power, j) * v0**j * v1 ** (second_power - j)
            if cv == 0:
                continue
            terms[(i + j, first_power + second_power - i - j)] += cu * cv
    return dict(terms)


def term(r: int, s: int, k: int, l: int) -> Monomial:  # noqa: E741
    return Monomial(r, s, k, l)


# b1, b1^dag, b2, b2^dag
LINEAR = (term(0, 1, 0, 0), term(1, 0, 0, 0), term(0, 0, 0, 1), term(0, 0, 1, 0))

# polarization-changing and two-photon terms
SET_A = (
    term(1, 0, 0, 1),
    term(0, 1, 1, 0),
    term(2, 0, 0, 0),
    term(0, 0, 2, 0),
    term(0, 2, 0, 0),
    term(0, 0, 0, 2),
)

# counter-rotating terms b1 b2, b1^dag b2^dag
SET_B = (term(0, 1, 0, 1), term(1, 0, 1, 0))

# number operators
SET_C = (term(1, 1, 0, 0), term(0, 0, 1, 1))

BILINEAR = SET_A + SET_B + SET_C

NAMED_TERM_SETS = {
    "linear": LINEAR,
    "A": SET_A,
    "B": SET_B,
    "C": SET_C,
    "bilinear": BILINEAR,
}


def unique_terms(terms: Iterable[Monomial]) -> Tuple[Monomial, ...]:
    """Deduplicate by exponents (first weight wins) and sort deterministically."""
    seen = {}
    for m in terms:
        seen.setdefault(m.exponents, m)
    return tuple(sorted(seen.values(), key=Monomial.sort_key))


def is_total_number(image: Dict[Exponents, complex], tol: float = 1e-12) -> bool:
    """True when ``image`` is c (n1 + n2) with c != 0."""
    n1 = image.get((1, 1, 0, 0), 0.0)
    n2 = image.get((0, 0, 1, 1), 0.0)
    others = [abs(c) for key, c in image.items() if key not in ((1, 1, 0, 0), (0, 0, 1, 1))]
    if any(c > tol for c in others):
        return False
    return abs(n1) > tol and abs(n1 - n2) <= tol
