"""
Truncated multi-mode bosonic Fock space.

Conventions (the only place they are fixed):
    * every mode is truncated to occupations 0..d-1, d = dim_per_mode;
    * the tensor product runs over modes in index order, mode 0 being the
      slowest-varying factor, i.e. |m_0, m_1, ..., m_{n-1}> sits at index
      sum_j m_j * d**(n-1-j);
    * all single-mode operators reach the full space through ``embed``.

Operators and states are immutable once built.
"""

import functools
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from bbfiber import settings
from bbfiber.exceptions import FockSpaceError, OperatorError, StateError

logger = logging.getLogger(__name__)

FLAG_TOL = 1e-12
NORM_TOL = 1e-12
PSD_FLOOR = -1e-10

Scalar = Union[int, float, complex]


@dataclass(frozen=True)
class FockSpace:
    """Truncated Fock space of ``num_modes`` bosonic modes."""

    num_modes: int
    dim_per_mode: int = settings.DIM_PER_MODE

    def __post_init__(self):
        for name in ("num_modes", "dim_per_mode"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise FockSpaceError(f"{name} must be a positive integer, got {value!r}")
        if self.total_dim > settings.MAX_DIMENSION:
            raise FockSpaceError(
                f"Total dimension {self.total_dim} exceeds the dense cap "
                f"{settings.MAX_DIMENSION}"
            )

    @property
    def total_dim(self) -> int:
        return int(self.dim_per_mode) ** int(self.num_modes)

    @property
    def dims(self) -> tuple:
        return (self.dim_per_mode,) * self.num_modes

    def check_mode(self, mode: int) -> None:
        if isinstance(mode, bool) or not isinstance(mode, (int, np.integer)):
            raise FockSpaceError(f"Mode index must be an integer, got {mode!r}")
        if not 0 <= mode < self.num_modes:
            raise FockSpaceError(f"Mode {mode} out of range for {self.num_modes} mode(s)")

    def index_of(self, occupations: Sequence[int]) -> int:
        """Flat basis index of an occupation tuple."""
        if len(occupations) != self.num_modes:
            raise FockSpaceError(
                f"Expected {self.num_modes} occupations, got {len(occupations)}"
            )
        for m in occupations:
            if not 0 <= m < self.dim_per_mode:
                raise FockSpaceError(
                    f"Occupation {m} outside truncation 0..{self.dim_per_mode - 1}"
                )
        return int(np.ravel_multi_index(tuple(occupations), self.dims))

    def occupations(self, index: int) -> tuple:
        return tuple(int(m) for m in np.unravel_index(index, self.dims))

    def occupation_table(self) -> np.ndarray:
        """Array of shape (total_dim, num_modes) listing every basis occupation."""
        grids = np.indices(self.dims).reshape(self.num_modes, -1)
        return grids.T.copy()


def tensor_spaces(first: FockSpace, second: FockSpace) -> FockSpace:
    """Join two spaces; the modes of ``first`` come first."""
    if first.dim_per_mode != second.dim_per_mode:
        raise FockSpaceError("Joined spaces must share the per-mode truncation")
    return FockSpace(first.num_modes + second.num_modes, first.dim_per_mode)


def _max_abs(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Dense operator on a FockSpace."""

    space: FockSpace
    matrix: np.ndarray
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        dim = self.space.total_dim
        if matrix.shape != (dim, dim):
            raise OperatorError(
                f"Operator shape {matrix.shape} does not match space dimension {dim}"
            )
        if self.hermitian and _max_abs(matrix - matrix.conj().T) > FLAG_TOL:
            raise OperatorError("Operator flagged Hermitian is not Hermitian within 1e-12")
        if self.unitary and _max_abs(matrix.conj().T @ matrix - np.eye(dim)) > FLAG_TOL:
            raise OperatorError("Operator flagged unitary is not unitary within 1e-12")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    def _check_space(self, other: "FockOperator") -> None:
        if not isinstance(other, FockOperator):
            raise OperatorError(f"Expected FockOperator, got {type(other).__name__}")
        if other.space != self.space:
            raise OperatorError(f"Space mismatch: {self.space} vs {other.space}")

    def __add__(self, other: "FockOperator") -> "FockOperator":
        self._check_space(other)
        return FockOperator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        self._check_space(other)
        return FockOperator(self.space, self.matrix - other.matrix)

    def __neg__(self) -> "FockOperator":
        return FockOperator(self.space, -self.matrix, hermitian=self.hermitian)

    def __mul__(self, scalar: Scalar) -> "FockOperator":
        if isinstance(scalar, FockOperator):
            raise OperatorError("Use @ for operator products")
        return FockOperator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        self._check_space(other)
        return FockOperator(self.space, self.matrix @ other.matrix)

    def dag(self) -> "FockOperator":
        return FockOperator(
            self.space, self.matrix.conj().T, hermitian=self.hermitian, unitary=self.unitary
        )

    def commutator(self, other: "FockOperator") -> "FockOperator":
        self._check_space(other)
        return FockOperator(self.space, self.matrix @ other.matrix - other.matrix @ self.matrix)

    def hermiticity_residual(self) -> float:
        return _max_abs(self.matrix - self.matrix.conj().T)

    def is_hermitian(self, tol: float = FLAG_TOL) -> bool:
        return self.hermiticity_residual() <= tol

    def norm(self) -> float:
        """Spectral norm."""
        return float(np.linalg.norm(self.matrix, 2)) if self.matrix.size else 0.0

    def hermitized(self) -> "FockOperator":
        """Return (A + A^dag)/2 flagged Hermitian."""
        return FockOperator(self.space, 0.5 * (self.matrix + self.matrix.conj().T), hermitian=True)


def embed(single: np.ndarray, mode: int, space: FockSpace) -> FockOperator:
    """Place a d x d single-mode matrix on ``mode``, identities elsewhere."""
    space.check_mode(mode)
    d = space.dim_per_mode
    single = np.asarray(single, dtype=complex)
    if single.shape != (d, d):
        raise OperatorError(f"Single-mode matrix must be {d}x{d}, got {single.shape}")
    factors = [np.eye(d, dtype=complex)] * space.num_modes
    factors[mode] = single
    return FockOperator(space, functools.reduce(np.kron, factors))


def identity(space: FockSpace) -> FockOperator:
    return FockOperator(space, np.eye(space.total_dim), hermitian=True, unitary=True)


def annihilation(space: FockSpace, mode: int) -> FockOperator:
    """Lowering operator b with <m-1|b|m> = sqrt(m), truncated at d."""
    d = space.dim_per_mode
    lowering = np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)
    return embed(lowering, mode, space)


def creation(space: FockSpace, mode: int) -> FockOperator:
    return annihilation(space, mode).dag()


def number(space: FockSpace, mode: int) -> FockOperator:
    """b^dag b, built directly as diag(0..d-1) so its entries are exact integers."""
    d = space.dim_per_mode
    op = embed(np.diag(np.arange(d, dtype=float)), mode, space)
    return FockOperator(space, op.matrix, hermitian=True)


def matrix_exponential(a: FockOperator, scale: Scalar = 1.0) -> FockOperator:
    """
    exp(scale * A).

    Hermitian A goes through an eigendecomposition; anything else through
    scaling-and-squaring. The result is flagged unitary when A is Hermitian and
    ``scale`` is purely imaginary.
    """
    scale = complex(scale)
    if not np.all(np.isfinite(a.matrix)) or not np.isfinite(scale):
        raise OperatorError("matrix_exponential requires finite entries")

    if a.hermitian or a.is_hermitian():
        hermitian = 0.5 * (a.matrix + a.matrix.conj().T)
        eigenvalues, vectors = scipy.linalg.eigh(hermitian)
        result = (vectors * np.exp(scale * eigenvalues)) @ vectors.conj().T
        return FockOperator(a.space, result, unitary=(scale.real == 0.0))

    return FockOperator(a.space, scipy.linalg.expm(scale * a.matrix))


def op_distance(a: FockOperator, b: FockOperator, phase_invariant: bool = False) -> float:
    """
    Spectral-norm distance ||A - B||, or min over phi of ||A - e^{i phi} B||.
    """
    a._check_space(b)
    if not phase_invariant:
        return (a - b).norm()

    def distance_at(phi: float) -> float:
        return float(np.linalg.norm(a.matrix - np.exp(1j * phi) * b.matrix, 2))

    overlap = np.trace(b.matrix.conj().T @ a.matrix)
    candidates = [float(np.angle(overlap))] if abs(overlap) > 0 else []
    candidates.extend(np.linspace(0.0, 2 * np.pi, 32, endpoint=False))
    values = [(distance_at(phi), phi) for phi in candidates]
    best, best_phi = min(values)
    refined = minimize_scalar(
        distance_at,
        bounds=(best_phi - np.pi / 16, best_phi + np.pi / 16),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(min(best, refined.fun))


@dataclass(frozen=True, eq=False)
class FockState:
    """State vector or density matrix on a FockSpace."""

    space: FockSpace
    data: np.ndarray
    is_density: bool = False
    positive: bool = False

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        dim = self.space.total_dim
        if self.is_density:
            if data.shape != (dim, dim):
                raise StateError(f"Density shape {data.shape} does not match dimension {dim}")
            trace = np.trace(data)
            if abs(trace - 1.0) > NORM_TOL:
                raise StateError(f"Density trace {trace.real:.15g} differs from 1")
            if self.positive:
                hermitian = 0.5 * (data + data.conj().T)
                lowest = float(np.min(np.linalg.eigvalsh(hermitian)))
                if lowest < PSD_FLOOR:
                    raise StateError(f"Density has negative eigenvalue {lowest:.3e}")
        else:
            if data.shape != (dim,):
                raise StateError(f"Vector shape {data.shape} does not match dimension {dim}")
            norm = np.linalg.norm(data)
            if abs(norm - 1.0) > NORM_TOL:
                raise StateError(f"State norm {norm:.15g} differs from 1")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_vector(
        cls, space: FockSpace, vector: np.ndarray, normalize: bool = False
    ) -> "FockState":
        vector = np.asarray(vector, dtype=complex)
        if normalize:
            norm = np.linalg.norm(vector)
            if norm == 0:
                raise StateError("Cannot normalize the zero vector")
            vector = vector / norm
        return cls(space, vector)

    @classmethod
    def from_density(
        cls, space: FockSpace, rho: np.ndarray, check_positive: bool = True
    ) -> "FockState":
        return cls(space, rho, is_density=True, positive=check_positive)

    def to_density(self) -> "FockState":
        if self.is_density:
            return self
        return FockState(
            self.space, np.outer(self.data, self.data.conj()), is_density=True, positive=True
        )

    def purity(self) -> float:
        rho = self.to_density().data
        return float(np.real(np.trace(rho @ rho)))

    def evolve(self, unitary: FockOperator) -> "FockState":
        if unitary.space != self.space:
            raise StateError("State and operator live on different spaces")
        u = unitary.matrix
        if self.is_density:
            return FockState(self.space, u @ self.data @ u.conj().T, is_density=True)
        return FockState(self.space, u @ self.data)


def basis_state(space: FockSpace, occupations: Sequence[int]) -> FockState:
    vector = np.zeros(space.total_dim, dtype=complex)
    vector[space.index_of(occupations)] = 1.0
    return FockState(space, vector)


def vacuum(space: FockSpace) -> FockState:
    return basis_state(space, (0,) * space.num_modes)


def thermal_density(dim_per_mode: int, mean_occupation: float) -> np.ndarray:
    """Single-mode thermal density truncated to 0..d-1 and renormalized."""
    if mean_occupation < 0:
        raise StateError(f"Mean occupation must be nonnegative, got {mean_occupation}")
    if mean_occupation == 0:
        weights = np.zeros(dim_per_mode)
        weights[0] = 1.0
    else:
        ratio = mean_occupation / (1.0 + mean_occupation)
        weights = ratio ** np.arange(dim_per_mode, dtype=float)
    return np.diag(weights / weights.sum()).astype(complex)


def tensor_states(first: FockState, second: FockState) -> FockState:
    """Product state; the modes of ``first`` come first."""
    space = tensor_spaces(first.space, second.space)
    if not first.is_density and not second.is_density:
        return FockState(space, np.kron(first.data, second.data))
    rho = np.kron(first.to_density().data, second.to_density().data)
    return FockState(space, rho, is_density=True)


def partial_trace(rho: FockState, keep: Iterable[int]) -> FockState:
    """Reduced density matrix on the modes in ``keep`` (returned in ascending order)."""
    if not rho.is_density:
        raise StateError("partial_trace needs a density matrix; call to_density() first")
    space = rho.space
    keep = sorted(set(keep))
    if not keep:
        raise StateError("partial_trace needs at least one mode to keep")
    for mode in keep:
        space.check_mode(mode)

    n = space.num_modes
    d = space.dim_per_mode
    traced = [m for m in range(n) if m not in keep]
    dk = d ** len(keep)
    dt = d ** len(traced)

    tensor = rho.data.reshape(space.dims * 2)
    perm = keep + traced + [n + m for m in keep] + [n + m for m in traced]
    blocks = tensor.transpose(perm).reshape(dk, dt, dk, dt)
    reduced = np.einsum("ajbj->ab", blocks)
    return FockState.from_density(FockSpace(len(keep), d), reduced, check_positive=True)


def state_fidelity(rho: FockState, target: FockState) -> float:
    """
    Fidelity in the squared convention, F = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    A pure target reduces this to <psi|rho|psi>.
    """
    if rho.space != target.space:
        raise StateError("Fidelity needs states on the same space")
    if not target.is_density:
        psi = target.data
        if rho.is_density:
            value = np.vdot(psi, rho.data @ psi)
        else:
            value = abs(np.vdot(psi, rho.data)) ** 2
        return float(np.real(value))
    if not rho.is_density:
        return state_fidelity(target, rho)
    root = scipy.linalg.sqrtm(rho.data)
    inner = scipy.linalg.sqrtm(root @ target.data @ root)
    return float(np.real(np.trace(inner)) ** 2)


def truncation_edge_population(state: FockState, modes: Optional[Sequence[int]] = None) -> float:
    """Probability weight on basis states with some listed mode at occupation d-1."""
    space = state.space
    modes = range(space.num_modes) if modes is None else modes
    table = space.occupation_table()
    mask = np.zeros(space.total_dim, dtype=bool)
    for mode in modes:
        mask |= table[:, mode] == space.dim_per_mode - 1
    if state.is_density:
        weights = np.real(np.diag(state.data))
    else:
        weights = np.abs(state.data) ** 2
    return float(np.sum(weights[mask]))
