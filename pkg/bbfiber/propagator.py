"""
Segment-by-segment propagation with bang-bang pulses between segments.

The propagator is built as U = ... E_2 P_2 E_1 P_1 with E_k = exp(-i H(k) tau);
the pulse schedule repeats every ``controls.num_segments`` segments.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from bbfiber import settings
from bbfiber.controls import PI, ControlElement, ControlSequence, PhaseShifter
from bbfiber.exceptions import PropagationError
from bbfiber.fock import (
    FockOperator,
    FockState,
    matrix_exponential,
    op_distance,
    partial_trace,
    state_fidelity,
)
from bbfiber.hamiltonian import (
    FiberModel,
    SegmentHamiltonian,
    build_H0,
    build_HIl,
    build_segment,
    logical_state,
)
from bbfiber.utils import handle_numeric_errors, validate_input_types

logger = logging.getLogger(__name__)

UNITARITY_TOL = 1e-10
PURE_TOL = 1e-12
EDGE_WARN = 1e-8
LAMB_HERMITIAN_TOL = 1e-12
LAMB_PURITY_TOL = 1e-8


@dataclass(frozen=True)
class SegmentDiagnostic:
    k: int
    edge_population: float


@dataclass(frozen=True)
class QubitMetrics:
    """Figures of merit of the polarization qubit against the ideal transport."""

    fidelity: float
    coherence: float
    purity: float
    survival: float
    block_purity: float


@dataclass(frozen=True)
class PropagationResult:
    unitary: FockOperator
    final_state: FockState
    reduced_system: FockState
    metrics: QubitMetrics
    diagnostics: Tuple[SegmentDiagnostic, ...]

    @property
    def fidelity(self) -> float:
        return self.metrics.fidelity

    @property
    def coherence(self) -> float:
        return self.metrics.coherence

    @property
    def purity(self) -> float:
        return self.metrics.purity

    @property
    def max_edge_population(self) -> float:
        return max((d.edge_population for d in self.diagnostics), default=0.0)


def _check_schedule(model: FiberModel, controls: Optional[ControlSequence]) -> int:
    if controls is None or controls.num_segments == 0:
        return 0
    period = controls.num_segments
    if model.num_segments % period:
        raise PropagationError(
            f"{model.num_segments} segments are not a whole number of {period}-segment periods"
        )
    if not controls.is_cyclic():
        logger.warning("Propagating with non-cyclic sequence %s", controls)
    return period


def _pulses(
    controls: Optional[ControlSequence], k: int, period: int
) -> Tuple[Optional[ControlElement], Optional[ControlElement]]:
    """(pulse before segment k, pulse after it)."""
    if not period:
        return None, None
    position = (k - 1) % period
    before = controls.controls[position]
    after = controls.trailing if position == period - 1 else None
    return before, after


class _Propagator:
    """Caches pulse unitaries and, for homogeneous models, the segment exponential."""

    def __init__(self, model: FiberModel, member: int):
        self.model = model
        self.member = member
        self.space = model.space
        self._pulses: Dict[ControlElement, np.ndarray] = {}
        self._homogeneous: Optional[np.ndarray] = None

    def pulse(self, element: ControlElement) -> np.ndarray:
        cached = self._pulses.get(element)
        if cached is None:
            cached = element.unitary(self.space).matrix
            self._pulses[element] = cached
        return cached

    def segment(self, k: int) -> np.ndarray:
        if self.model.epsilon == 0 and self._homogeneous is not None:
            return self._homogeneous
        h = build_segment(self.model, k, self.member).total
        exponential = matrix_exponential(h, -1j * self.model.tau_s).matrix
        if self.model.epsilon == 0:
            self._homogeneous = exponential
        return exponential


def _edge_mask(model: FiberModel) -> np.ndarray:
    space = model.space
    table = space.occupation_table()
    return np.any(table == space.dim_per_mode - 1, axis=1)


def _apply(u: np.ndarray, data: np.ndarray, is_density: bool) -> np.ndarray:
    if is_density:
        return u @ data @ u.conj().T
    return u @ data


def _population(data: np.ndarray, is_density: bool, mask: np.ndarray) -> float:
    weights = np.real(np.diag(data)) if is_density else np.abs(data) ** 2
    return float(np.sum(weights[mask]))


def qubit_metrics(final: FockState, ideal: FockState) -> QubitMetrics:
    """
    Compare the reduced polarization state with the ideal one.

    ``purity`` is tr rho^2 of the reduced two-mode state. ``block_purity`` is taken on
    the renormalized single-photon block {|1,0>, |0,1>}; an empty block counts as
    maximally mixed.
    """
    rho = partial_trace(final.to_density(), (0, 1))
    target = partial_trace(ideal.to_density(), (0, 1))
    if target.purity() >= 1.0 - PURE_TOL:
        eigenvalues, vectors = np.linalg.eigh(target.data)
        target = FockState.from_vector(target.space, vectors[:, -1], normalize=True)
    fidelity = state_fidelity(rho, target)

    space = rho.space
    logical = [space.index_of((1, 0)), space.index_of((0, 1))]
    block = rho.data[np.ix_(logical, logical)]
    survival = float(np.real(np.trace(block)))
    if survival > 1e-15:
        block_purity = float(np.real(np.trace(block @ block))) / survival**2
    else:
        block_purity = 0.5
    return QubitMetrics(
        fidelity=fidelity,
        coherence=float(abs(block[0, 1])),
        purity=rho.purity(),
        survival=survival,
        block_purity=block_purity,
    )


def ideal_evolution(model: FiberModel) -> FockOperator:
    """exp(-i H0 T): transport with no coupling and no inhomogeneity."""
    return matrix_exponential(build_H0(model), -1j * model.total_time_s)


def full_propagator(
    model: FiberModel, controls: Optional[ControlSequence] = None, member: int = 0
) -> FockOperator:
    """U(T) including pulses; no state bookkeeping."""
    period = _check_schedule(model, controls)
    engine = _Propagator(model, member)
    u = np.eye(model.space.total_dim, dtype=complex)
    for k in range(1, model.num_segments + 1):
        before, after = _pulses(controls, k, period)
        if before is not None:
            u = engine.pulse(before) @ u
        u = engine.segment(k) @ u
        if after is not None:
            u = engine.pulse(after) @ u
    return _checked_unitary(model, u)


def _checked_unitary(model: FiberModel, u: np.ndarray) -> FockOperator:
    deviation = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if deviation > UNITARITY_TOL:
        raise PropagationError(f"Propagator lost unitarity: deviation {deviation:.3e}")
    return FockOperator(model.space, u)


@handle_numeric_errors
def evolve(
    model: FiberModel,
    controls: Optional[ControlSequence] = None,
    initial: Optional[FockState] = None,
    member: int = 0,
) -> PropagationResult:
    """
    Propagate ``initial`` through all N segments.

    Args:
        model: Fiber model; its epsilon and seed select the inhomogeneity draws
        controls: One period of pulses, or None for free propagation
        initial: State on ``model.space``; defaults to (|1,0> + |0,1>)/sqrt(2) x bath
        member: Ensemble member index keying the draws

    Returns:
        PropagationResult with metrics against exp(-i H0 T) applied to ``initial``

    Raises:
        PropagationError: If the schedule does not fit N or unitarity is lost
    """
    initial = logical_state(model) if initial is None else initial
    if initial.space != model.space:
        raise PropagationError("Initial state does not live on the model space")
    period = _check_schedule(model, controls)
    engine = _Propagator(model, member)
    mask = _edge_mask(model)

    u = np.eye(model.space.total_dim, dtype=complex)
    data = np.array(initial.data)
    diagnostics = []
    for k in range(1, model.num_segments + 1):
        before, after = _pulses(controls, k, period)
        step = engine.segment(k)
        if before is not None:
            step = step @ engine.pulse(before)
        if after is not None:
            step = engine.pulse(after) @ step
        u = step @ u
        data = _apply(step, data, initial.is_density)
        diagnostics.append(SegmentDiagnostic(k, _population(data, initial.is_density, mask)))

    unitary = _checked_unitary(model, u)
    final = FockState(model.space, _apply(u, initial.data, initial.is_density), initial.is_density)
    ideal = initial.evolve(ideal_evolution(model))
    metrics = qubit_metrics(final, ideal)
    worst = max(d.edge_population for d in diagnostics)
    if worst > EDGE_WARN:
        logger.warning("Truncation edge population reached %.3e", worst)
    return PropagationResult(
        unitary=unitary,
        final_state=final,
        reduced_system=partial_trace(final.to_density(), (0, 1)),
        metrics=metrics,
        diagnostics=tuple(diagnostics),
    )


def pair_cancellation_residual(
    segment: SegmentHamiltonian, tau_s: float, shifter: PhaseShifter = PI
) -> float:
    """Phase-invariant ||E P E P - exp(-2i H0 tau)|| with E = exp(-i H tau)."""
    space = segment.H0.space
    step = matrix_exponential(segment.total, -1j * tau_s)
    pulse = shifter.unitary(space)
    pair = step @ pulse @ step @ pulse
    target = matrix_exponential(segment.H0, -2j * tau_s)
    return op_distance(pair, target, phase_invariant=True)


@dataclass(frozen=True)
class ScalingFit:
    """Slope of log error against log tau at fixed total time."""

    order: float
    intercept: float
    taus: Tuple[float, ...]
    errors: Tuple[float, ...]
    degenerate: bool


@handle_numeric_errors
def scaling_order(
    model: FiberModel,
    controls: Optional[ControlSequence],
    tau_grid: Sequence[float],
    total_time_s: Optional[float] = None,
) -> ScalingFit:
    """
    Fit err(tau) ~ tau^order, err = phase-invariant ||U(T) - exp(-i H0 T)||.

    Each tau must divide T into an even number of whole periods. Identically zero
    errors (no coupling) are reported as degenerate with order nan.
    """
    if len(tau_grid) < 2:
        raise PropagationError("scaling_order needs at least two tau values")
    total = model.total_time_s if total_time_s is None else total_time_s
    errors = []
    for tau in tau_grid:
        n = int(round(total / tau))
        if n < 2 or abs(n * tau - total) > 1e-9 * total:
            raise PropagationError(f"tau={tau} does not divide T={total}")
        resized = model.with_tau(tau, n)
        u = full_propagator(resized, controls)
        errors.append(op_distance(u, ideal_evolution(resized), phase_invariant=True))

    taus = tuple(float(t) for t in tau_grid)
    if max(errors) < 1e-12:
        logger.info("All scaling errors vanish; reporting a degenerate fit")
        return ScalingFit(math.nan, math.nan, taus, tuple(errors), True)
    slope, intercept = np.polyfit(np.log(taus), np.log(np.maximum(errors, 1e-300)), 1)
    return ScalingFit(float(slope), float(intercept), taus, tuple(errors), False)


@dataclass(frozen=True)
class LambShiftReport:
    """Effect of the second-order term H' = -i [H_I, H0] applied for tau^2."""

    h_prime: FockOperator
    hermiticity_residual: float
    purity_before: float
    purity_after: float
    overlap_phase: float
    zero_coupling: bool

    @property
    def purity_change(self) -> float:
        return abs(self.purity_after - self.purity_before)

    @property
    def passed(self) -> bool:
        """H' is Hermitian and leaves the polarization block pure."""
        return (
            self.hermiticity_residual < LAMB_HERMITIAN_TOL
            and self.purity_change < LAMB_PURITY_TOL
        )


def lamb_shift_check(model: FiberModel, tau_s: Optional[float] = None) -> LambShiftReport:
    """
    Apply exp(-i H' tau^2) to the logical state and compare block purities.

    H' only moves amplitude between the polarization block and the bath, so the
    renormalized block stays pure; ``passed`` checks that within tolerance.
    """
    tau_s = model.tau_s if tau_s is None else tau_s
    h0 = build_H0(model).matrix
    hil = build_HIl(model).matrix
    h_prime = FockOperator(model.space, -1j * (hil @ h0 - h0 @ hil))
    residual = h_prime.hermiticity_residual()
    zero_coupling = all(g == 0 for mode in model.bath_modes for g in mode.couplings)

    initial = logical_state(model)
    shifted = initial.evolve(matrix_exponential(h_prime.hermitized(), -1j * tau_s**2))
    before = qubit_metrics(initial, initial)
    after = qubit_metrics(shifted, initial)
    if initial.is_density:
        overlap = np.trace(initial.data @ shifted.data)
    else:
        overlap = np.vdot(initial.data, shifted.data)
    return LambShiftReport(
        h_prime=h_prime,
        hermiticity_residual=residual,
        purity_before=before.block_purity,
        purity_after=after.block_purity,
        overlap_phase=float(np.angle(overlap)),
        zero_coupling=zero_coupling,
    )


@dataclass(frozen=True)
class DecayEstimate:
    """Ensemble coherence factor relative to the same run without inhomogeneity."""

    mean: float
    stderr: float
    samples: Tuple[float, ...]
    reference_coherence: float


@validate_input_types(ensemble_size=int)
def inhomogeneous_decay(
    model: FiberModel,
    controls: Optional[ControlSequence],
    ensemble_size: Optional[int] = None,
    initial: Optional[FockState] = None,
) -> DecayEstimate:
    """
    Mean of |rho_10,01(eps)| / |rho_10,01(eps=0)| over ``ensemble_size`` draws.

    Members are evaluated in index order so results do not depend on scheduling.
    """
    size = settings.ENSEMBLE_SIZE if ensemble_size is None else ensemble_size
    if size < 1:
        raise PropagationError(f"ensemble_size must be positive, got {size}")
    reference = evolve(replace(model, epsilon=0.0), controls, initial).coherence
    if reference <= 0:
        raise PropagationError("Reference run has no polarization coherence to compare against")
    samples = tuple(
        evolve(model, controls, initial, member=member).coherence / reference
        for member in range(size)
    )
    values = np.array(samples)
    stderr = float(values.std(ddof=1) / math.sqrt(size)) if size > 1 else 0.0
    logger.debug("Decay over %d members: mean %.6f +- %.2e", size, values.mean(), stderr)
    return DecayEstimate(float(values.mean()), stderr, samples, reference)


@dataclass(frozen=True)
class PairedRun:
    with_bb: PropagationResult
    without_bb: PropagationResult

    @property
    def deficit_with(self) -> float:
        return 1.0 - self.with_bb.fidelity

    @property
    def deficit_without(self) -> float:
        return 1.0 - self.without_bb.fidelity

    @property
    def deficit_ratio(self) -> float:
        if self.deficit_without <= 0:
            return 0.0 if self.deficit_with <= 0 else math.inf
        return max(self.deficit_with, 0.0) / self.deficit_without


def compare_with_without(
    model: FiberModel,
    controls: ControlSequence,
    initial: Optional[FockState] = None,
    member: int = 0,
) -> PairedRun:
    """The same draws propagated with and without pulses."""
    return PairedRun(
        evolve(model, controls, initial, member),
        evolve(model, None, initial, member),
    )
