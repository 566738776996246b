"""
Fiber segment model: two polarization modes coupled to one or two bath modes.

Mode layout on the full space: 0 and 1 are the polarizations b1, b2; 2.. are
bath modes a_m. Every segment k = 1..N carries

    H0(k)   = omega1 n1 + omega2 n2 + sum_m nu_m a_m^dag a_m + eps P_k
    H_I(k)  = sum_m sum_j g_mj (b_j a_m^dag + b_j^dag a_m)     + eps Q_k
    H_Iq    = sum_c g_c sum_{M in c} (M + M^dag) X_c        (optional)

with P_k parity-even and Q_k parity-odd Hermitian draws of spectral norm eps,
so Pi H0 Pi = H0 and Pi H_I Pi = -H_I hold for every segment. X_c is the bath
factor of coupling c; the quadratic part is even under Pi.
"""

import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from bbfiber import settings
from bbfiber.controls import PI
from bbfiber.exceptions import ModelError, ParseError
from bbfiber.fock import (
    FockOperator,
    FockSpace,
    FockState,
    annihilation,
    basis_state,
    identity,
    number,
    tensor_states,
    thermal_density,
    vacuum,
)
from bbfiber.monomials import Monomial
from bbfiber.parser import LiteralParser

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
BATH_STATES = ("vacuum", "thermal")
BATH_FACTORS = ("position", "number", "identity")


@dataclass(frozen=True)
class BathMode:
    """One bath oscillator; g2 defaults to g so both polarizations couple equally."""

    nu_rad_s: float
    g_rad_s: float
    g2_rad_s: Optional[float] = None

    def __post_init__(self):
        if not np.isfinite(self.nu_rad_s) or self.nu_rad_s < 0:
            raise ModelError(f"Bath frequency must be finite and nonnegative, got {self.nu_rad_s}")
        if not np.isfinite(self.g_rad_s):
            raise ModelError(f"Coupling must be finite, got {self.g_rad_s}")

    @property
    def couplings(self) -> Tuple[float, float]:
        second = self.g_rad_s if self.g2_rad_s is None else self.g2_rad_s
        return (float(self.g_rad_s), float(second))


@dataclass(frozen=True)
class BilinearCoupling:
    """
    Quadratic photon terms coupled to the bath with one strength.

    ``terms`` is a term literal such as "A,B" or "c(1,0)a(0,1)"; each listed
    monomial enters as g (M + M^dag) times the bath factor.
    """

    terms: str
    g_rad_s: float
    bath_factor: str = "position"

    def __post_init__(self):
        if not isinstance(self.terms, str):
            raise ModelError(f"Bilinear terms must be a term literal, got {self.terms!r}")
        if not np.isfinite(self.g_rad_s):
            raise ModelError(f"Bilinear coupling must be finite, got {self.g_rad_s}")
        if self.bath_factor not in BATH_FACTORS:
            raise ModelError(
                f"bath_factor must be one of {BATH_FACTORS}, got {self.bath_factor!r}"
            )
        try:
            monomials = LiteralParser.parse_terms(self.terms)
        except ParseError as e:
            raise ModelError(f"Invalid bilinear terms {self.terms!r}: {str(e)}") from e
        odd = [m.label for m in monomials if m.degree % 2]
        if odd:
            raise ModelError(f"Bilinear couplings need even-degree terms, got {', '.join(odd)}")

    @property
    def monomials(self) -> Tuple[Monomial, ...]:
        return LiteralParser.parse_terms(self.terms)


@dataclass(frozen=True)
class FiberModel:
    """
    Piecewise-constant fiber of N segments of length delta_m.

    All physical fields carry their units in the name; time is delta_m / speed_m_s.
    """

    num_segments: int
    delta_m: float
    speed_m_s: float
    omega1_rad_s: float
    omega2_rad_s: float
    bath_modes: Tuple[BathMode, ...] = (BathMode(1.0, 0.01),)
    epsilon: float = 0.0
    seed: int = 0
    dim_per_mode: int = settings.DIM_PER_MODE
    degenerate: bool = False
    bath_state: str = "vacuum"
    bath_beta_s: Optional[float] = None
    bath_mean_occupation: float = 0.0
    bilinear_couplings: Tuple[BilinearCoupling, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "bath_modes", tuple(self.bath_modes))
        object.__setattr__(self, "bilinear_couplings", tuple(self.bilinear_couplings))
        if isinstance(self.num_segments, bool) or not isinstance(self.num_segments, int):
            raise ModelError(f"num_segments must be an integer, got {self.num_segments!r}")
        if self.num_segments < 2 or self.num_segments % 2:
            raise ModelError(
                f"num_segments must be a positive even number, got {self.num_segments}"
            )
        for name in ("delta_m", "speed_m_s"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ModelError(f"{name} must be positive and finite, got {value}")
        if not 1 <= len(self.bath_modes) <= 2:
            raise ModelError(f"Expected one or two bath modes, got {len(self.bath_modes)}")
        if self.epsilon < 0 or not np.isfinite(self.epsilon):
            raise ModelError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.degenerate and self.omega1_rad_s != self.omega2_rad_s:
            raise ModelError("degenerate models need omega1_rad_s == omega2_rad_s")
        if self.bath_state not in BATH_STATES:
            raise ModelError(f"bath_state must be one of {BATH_STATES}, got {self.bath_state!r}")
        if self.bath_mean_occupation < 0:
            raise ModelError("bath_mean_occupation must be nonnegative")
        if not all(isinstance(c, BilinearCoupling) for c in self.bilinear_couplings):
            raise ModelError("bilinear_couplings must hold BilinearCoupling entries")
        # raises FockSpaceError early for oversized truncations
        self.space

    @property
    def tau_s(self) -> float:
        return self.delta_m / self.speed_m_s

    @property
    def total_time_s(self) -> float:
        return self.num_segments * self.tau_s

    @property
    def num_bath_modes(self) -> int:
        return len(self.bath_modes)

    @property
    def space(self) -> FockSpace:
        return FockSpace(2 + self.num_bath_modes, self.dim_per_mode)

    @property
    def system_space(self) -> FockSpace:
        return FockSpace(2, self.dim_per_mode)

    @property
    def bath_space(self) -> FockSpace:
        return FockSpace(self.num_bath_modes, self.dim_per_mode)

    def with_tau(self, tau_s: float, num_segments: int) -> "FiberModel":
        return replace(self, delta_m=tau_s * self.speed_m_s, num_segments=num_segments)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["bath_modes"] = [
            {k: v for k, v in asdict(mode).items() if v is not None} for mode in self.bath_modes
        ]
        data["bilinear_couplings"] = [asdict(c) for c in self.bilinear_couplings]
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FiberModel":
        """
        Build a model from a config mapping, rejecting unknown keys.

        Raises:
            ModelError: On unknown keys or invalid values
        """
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ModelError(f"Unknown model key(s): {', '.join(unknown)}")
        values = dict(data)
        if "bath_modes" in values:
            values["bath_modes"] = _entries(values["bath_modes"], BathMode, "bath mode")
        if "bilinear_couplings" in values:
            values["bilinear_couplings"] = _entries(
                values["bilinear_couplings"], BilinearCoupling, "bilinear coupling"
            )
        try:
            return cls(**values)
        except TypeError as e:
            raise ModelError(f"Invalid model: {str(e)}") from e


def _entries(items: Any, entry_type: type, label: str) -> tuple:
    built = []
    for entry in items:
        if not isinstance(entry, Mapping):
            raise ModelError(f"Each {label} must be an object, got {entry!r}")
        extra = sorted(set(entry) - set(entry_type.__dataclass_fields__))
        if extra:
            raise ModelError(f"Unknown {label} key(s): {', '.join(extra)}")
        try:
            built.append(entry_type(**entry))
        except TypeError as e:
            raise ModelError(f"Invalid {label}: {str(e)}") from e
    return tuple(built)


def _check_segment(model: FiberModel, k: int) -> None:
    valid = isinstance(k, (int, np.integer)) and not isinstance(k, bool)
    if not valid or not 1 <= k <= model.num_segments:
        raise ModelError(f"Segment index must lie in 1..{model.num_segments}, got {k!r}")


def system_parity(space: FockSpace) -> FockOperator:
    """Pi = exp(i pi (n1 + n2)) on modes 0 and 1."""
    return PI.unitary(space)


def build_H0(model: FiberModel, k: int = 1) -> FockOperator:
    """Free Hamiltonian of segment k (the homogeneous part)."""
    _check_segment(model, k)
    space = model.space
    h = model.omega1_rad_s * number(space, 0).matrix + model.omega2_rad_s * number(space, 1).matrix
    for index, mode in enumerate(model.bath_modes):
        h = h + mode.nu_rad_s * number(space, 2 + index).matrix
    return FockOperator(space, h, hermitian=True)


def build_HIl(model: FiberModel, k: int = 1) -> FockOperator:
    """Linear system-bath coupling sum g (b_j a^dag + b_j^dag a)."""
    _check_segment(model, k)
    space = model.space
    h = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for index, mode in enumerate(model.bath_modes):
        a = annihilation(space, 2 + index).matrix
        for j, g in enumerate(mode.couplings):
            hop = annihilation(space, j).matrix @ a.conj().T
            h = h + g * (hop + hop.conj().T)
    return FockOperator(space, h, hermitian=True)


def bath_factor(model: FiberModel, kind: str = "position") -> np.ndarray:
    """Hermitian bath operator: sum_m (a_m + a_m^dag), sum_m a_m^dag a_m, or the identity."""
    space = model.space
    if kind not in BATH_FACTORS:
        raise ModelError(f"bath factor must be one of {BATH_FACTORS}, got {kind!r}")
    if kind == "identity":
        return identity(space).matrix
    factor = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for index in range(model.num_bath_modes):
        if kind == "position":
            a = annihilation(space, 2 + index).matrix
            factor = factor + a + a.conj().T
        else:
            factor = factor + number(space, 2 + index).matrix
    return factor


def build_monomial(
    model: FiberModel, m: Monomial, coupling: complex = 1.0, kind: str = "position"
) -> FockOperator:
    """(c M + c* M^dag) tensored with a Hermitian bath factor, c = coupling * weight."""
    space = model.space
    c = complex(coupling) * m.weight
    system = m.with_weight(1.0).matrix(space).matrix
    term = c * system + np.conj(c) * system.conj().T
    return FockOperator(space, term @ bath_factor(model, kind), hermitian=True)


def build_bilinear(
    model: FiberModel,
    terms: Sequence[Monomial],
    couplings: Union[complex, Mapping[Monomial, complex]] = 1.0,
    kind: str = "position",
) -> FockOperator:
    """
    Sum of build_monomial over ``terms``.

    ``couplings`` is one scalar for all terms or a mapping keyed by monomial
    exponents; terms missing from the mapping get zero coupling.
    """
    space = model.space
    if isinstance(couplings, Mapping):
        by_exponents = {m.exponents: complex(c) for m, c in couplings.items()}
    else:
        by_exponents = None
    total = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for m in terms:
        c = complex(couplings) if by_exponents is None else by_exponents.get(m.exponents, 0.0)
        if c != 0:
            total = total + build_monomial(model, m, c, kind).matrix
    return FockOperator(space, total, hermitian=True)


def build_HIq(model: FiberModel, k: int = 1) -> Optional[FockOperator]:
    """Quadratic coupling of segment k from the model's bilinear couplings, or None."""
    _check_segment(model, k)
    if not model.bilinear_couplings:
        return None
    space = model.space
    total = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for coupling in model.bilinear_couplings:
        term = build_bilinear(model, coupling.monomials, coupling.g_rad_s, coupling.bath_factor)
        total = total + term.matrix
    return FockOperator(space, total, hermitian=True)


@dataclass(frozen=True)
class InhomogeneityDraw:
    """eps P_k (parity-even) and eps Q_k (parity-odd) for one segment."""

    k: int
    member: int
    P: FockOperator
    Q: FockOperator


def draw_generator(seed: int, member: int, k: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, member, k), independent of evaluation order."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, member, k])))


def _normalized_part(matrix: np.ndarray, epsilon: float) -> np.ndarray:
    norm = np.linalg.norm(matrix, 2)
    if norm == 0:
        return np.zeros_like(matrix)
    return epsilon * matrix / norm


def draw_inhomogeneity(model: FiberModel, k: int, member: int = 0) -> InhomogeneityDraw:
    """
    Gaussian Hermitian perturbations for segment k, split by system parity.

    Entries are i.i.d. complex normal before Hermitization; each part is then
    rescaled to spectral norm epsilon.
    """
    _check_segment(model, k)
    space = model.space
    dim = space.total_dim
    if model.epsilon == 0:
        zero = FockOperator(space, np.zeros((dim, dim)), hermitian=True)
        return InhomogeneityDraw(k, member, zero, zero)

    rng = draw_generator(model.seed, member, k)
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    hermitian = 0.5 * (raw + raw.conj().T)
    parity = system_parity(space).matrix
    flipped = parity @ hermitian @ parity.conj().T
    even = _normalized_part(0.5 * (hermitian + flipped), model.epsilon)
    odd = _normalized_part(0.5 * (hermitian - flipped), model.epsilon)
    # exact Hermitian after the float rescaling
    even = 0.5 * (even + even.conj().T)
    odd = 0.5 * (odd + odd.conj().T)
    return InhomogeneityDraw(
        k,
        member,
        FockOperator(space, even, hermitian=True),
        FockOperator(space, odd, hermitian=True),
    )


@dataclass(frozen=True)
class SegmentHamiltonian:
    """Hamiltonian pieces of one segment; H_I^q is optional."""

    k: int
    H0: FockOperator
    HIl: FockOperator
    HIq: Optional[FockOperator] = None

    def __post_init__(self):
        parity = system_parity(self.H0.space).matrix
        even_residual = np.max(np.abs(parity @ self.H0.matrix @ parity - self.H0.matrix))
        odd_residual = np.max(np.abs(parity @ self.HIl.matrix @ parity + self.HIl.matrix))
        if even_residual > SYMMETRY_TOL or odd_residual > SYMMETRY_TOL:
            raise ModelError(
                f"Segment {self.k} breaks parity symmetry: "
                f"even residual {even_residual:.3e}, odd residual {odd_residual:.3e}"
            )

    @property
    def total(self) -> FockOperator:
        h = self.H0 + self.HIl
        if self.HIq is not None:
            h = h + self.HIq
        return FockOperator(h.space, h.matrix, hermitian=True)


def build_segment(model: FiberModel, k: int, member: int = 0) -> SegmentHamiltonian:
    """Segment k with its inhomogeneity draw folded in and H_I^q when the model has one."""
    draw = draw_inhomogeneity(model, k, member)
    h0 = build_H0(model, k) + draw.P
    hil = build_HIl(model, k) + draw.Q
    return SegmentHamiltonian(
        k,
        FockOperator(h0.space, h0.matrix, hermitian=True),
        FockOperator(hil.space, hil.matrix, hermitian=True),
        build_HIq(model, k),
    )


def bose_occupation(omega_rad_s: float, beta_s: float) -> float:
    """1 / (exp(beta omega) - 1)."""
    if omega_rad_s <= 0 or beta_s <= 0:
        raise ModelError("Thermal occupation needs positive frequency and beta")
    return float(1.0 / math.expm1(beta_s * omega_rad_s))


def bath_occupations(model: FiberModel) -> Tuple[float, ...]:
    if model.bath_state == "vacuum":
        return (0.0,) * model.num_bath_modes
    if model.bath_beta_s is not None:
        return tuple(bose_occupation(mode.nu_rad_s, model.bath_beta_s) for mode in model.bath_modes)
    return (model.bath_mean_occupation,) * model.num_bath_modes


def bath_state(model: FiberModel) -> FockState:
    """Initial bath state: vacuum vector, or a product of truncated thermal densities."""
    space = model.bath_space
    occupations = bath_occupations(model)
    if all(n == 0 for n in occupations):
        return vacuum(space)
    rho = np.ones((1, 1), dtype=complex)
    for n in occupations:
        rho = np.kron(rho, thermal_density(model.dim_per_mode, n))
    return FockState.from_density(space, rho)


def logical_state(model: FiberModel, a: complex = 1.0, b: complex = 1.0) -> FockState:
    """a|1,0> + b|0,1> on the polarization modes (normalized), times the bath state."""
    space = model.system_space
    vector = a * basis_state(space, (1, 0)).data + b * basis_state(space, (0, 1)).data
    system = FockState.from_vector(space, vector, normalize=True)
    return tensor_states(system, bath_state(model))


def polarization_commutes(model: FiberModel, element) -> bool:
    """True when the free system Hamiltonian commutes with ``element`` on the polarization modes."""
    space = model.system_space
    h = model.omega1_rad_s * number(space, 0).matrix + model.omega2_rad_s * number(space, 1).matrix
    u = element.unitary(space).matrix
    return bool(np.max(np.abs(h @ u - u @ h)) <= SYMMETRY_TOL * max(1.0, abs(model.omega1_rad_s)))

