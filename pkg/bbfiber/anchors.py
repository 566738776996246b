"""
Reproduction table: every quoted number next to its recomputed value.

Each row carries the quoted (often rounded) value and an acceptance range. With a
strict tolerance the range is replaced by |computed - quoted| <= tol * |quoted|.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from bbfiber.bounds import (
    DEBYE_REFERENCE_OMEGA_C,
    BoundQuery,
    SpectralDensity,
    debye_omega_c,
    delta_bound,
    gamma_closed_zero_T,
    gamma_quadrature,
)
from bbfiber.calculus import classify, survival_weight
from bbfiber.controls import EIGHT_STEP, OMEGA_12, OMEGA_1234
from bbfiber.estimates import rough_estimate
from bbfiber.exceptions import BBFiberError
from bbfiber.hamiltonian import BathMode, FiberModel, build_segment
from bbfiber.monomials import LINEAR, SET_A, SET_B, SET_C
from bbfiber.propagator import pair_cancellation_residual

logger = logging.getLogger(__name__)

ANCHOR_DELTA = 1e-4
ANCHOR_OMEGA_C = DEBYE_REFERENCE_OMEGA_C
CLOSED_FORM_XS = (0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)
PAIR_TAUS = (1e-2, 5e-3, 2.5e-3)

HEADER = ("key", "label", "quoted", "computed", "low", "high", "pass")
LIST_HEADER = ("key", "label", "quoted", "low", "high")


@dataclass(frozen=True)
class AnchorRow:
    key: str
    label: str
    quoted: float
    low: float
    high: float
    compute: Callable[[], float] = field(compare=False, repr=False)


@dataclass(frozen=True)
class AnchorResult:
    row: AnchorRow
    computed: float
    passed: bool

    def as_tuple(self) -> Tuple:
        r = self.row
        return (r.key, r.label, r.quoted, self.computed, r.low, r.high, self.passed)


def _delta(n: int) -> float:
    return delta_bound(SpectralDensity(n, 1.0, ANCHOR_OMEGA_C), BoundQuery(ANCHOR_DELTA))


def _surviving(sequence, terms) -> float:
    return float(len(classify(sequence, terms).surviving))


def _eliminated(sequence, terms) -> float:
    return float(len(classify(sequence, terms).eliminated))


def _closed_vs_quadrature() -> float:
    worst = 0.0
    for n in (1, 2, 3):
        sd = SpectralDensity(n, 1.0, 1.0)
        for x in CLOSED_FORM_XS:
            closed = gamma_closed_zero_T(sd, x)
            worst = max(worst, abs(gamma_quadrature(sd, x, weight="vacuum") - closed) / closed)
    return worst


def _pair_ratio() -> float:
    """Worst deviation from 4 of residual(tau) / residual(tau / 2), reported as the ratio."""
    model = FiberModel(
        num_segments=2,
        delta_m=1.0,
        speed_m_s=1.0,
        omega1_rad_s=1.0,
        omega2_rad_s=1.5,
        bath_modes=(BathMode(1.2, 0.01),),
        dim_per_mode=3,
    )
    segment = build_segment(model, 1)
    residuals = [pair_cancellation_residual(segment, tau) for tau in PAIR_TAUS]
    ratios = [residuals[i] / residuals[i + 1] for i in range(len(residuals) - 1)]
    return max(ratios, key=lambda r: abs(r - 4.0))


def anchor_rows() -> Tuple[AnchorRow, ...]:
    linear = rough_estimate("linear")
    bilinear = rough_estimate("bilinear")
    bilinear_n = 5.0 / math.sqrt(20.0)
    # fmt: off
    return (
        AnchorRow("estimate.linear.loss", "loss per segment, linear", 2e-3, 2e-3, 2e-3,
                  lambda: linear.loss_per_segment),
        AnchorRow("estimate.linear.segments", "segments, linear", 25.0, 25.0, 25.0,
                  lambda: linear.num_segments),
        AnchorRow("estimate.linear.shifters", "phase shifters, linear", 50.0, 50.0, 50.0,
                  lambda: linear.shifter_count),
        AnchorRow("estimate.linear.delta_m", "shifter spacing (m), linear", 20.0, 20.0, 20.0,
                  lambda: linear.delta_m),
        AnchorRow("estimate.bilinear.segments", "segments, bilinear", bilinear_n,
                  bilinear_n - 1e-3, bilinear_n + 1e-3, lambda: bilinear.num_segments),
        AnchorRow("estimate.bilinear.delta_m", "shifter spacing (m), bilinear", 100.0, 90.0,
                  112.0, lambda: bilinear.delta_m),
        AnchorRow("delta.n1", "Delta (m), Ohmic n=1", 6e5, 5.5e5, 6.5e5, lambda: _delta(1)),
        AnchorRow("delta.n2", "Delta (m), super-Ohmic n=2", 0.6, 0.55, 0.65, lambda: _delta(2)),
        AnchorRow("delta.n3", "Delta (m), n=3", 1e-7, 1.0e-7, 1.6e-7, lambda: _delta(3)),
        AnchorRow("elim.omega12.linear", "linear survivors under omega12", 0.0, 0.0, 0.0,
                  lambda: _surviving(OMEGA_12, LINEAR)),
        AnchorRow("elim.omega12.AB", "A and B terms removed by omega12", 0.0, 0.0, 0.0,
                  lambda: _eliminated(OMEGA_12, SET_A + SET_B)),
        AnchorRow("elim.omega1234.linearA", "linear and A survivors under omega1234", 0.0,
                  0.0, 0.0, lambda: _surviving(OMEGA_1234, LINEAR + SET_A)),
        AnchorRow("elim.omega1234.B_weight", "B weight under omega1234", 4.0, 4.0, 4.0,
                  lambda: survival_weight(OMEGA_1234, SET_B[0]).magnitude),
        AnchorRow("elim.eightstep.linearAB", "linear, A and B survivors under eightstep", 0.0,
                  0.0, 0.0, lambda: _surviving(EIGHT_STEP, LINEAR + SET_A + SET_B)),
        AnchorRow("elim.eightstep.C", "C terms removed by eightstep", 0.0, 0.0, 0.0,
                  lambda: _eliminated(EIGHT_STEP, SET_C)),
        AnchorRow("gamma.closed_vs_quad", "closed form vs quadrature, max rel. error", 0.0,
                  0.0, 1e-6, _closed_vs_quadrature),
        AnchorRow("pair.residual_ratio", "pair residual ratio on halving tau", 4.0, 3.6, 4.4,
                  _pair_ratio),
        AnchorRow("debye.omega_c", "Debye cutoff (rad/s) from 342 K", DEBYE_REFERENCE_OMEGA_C,
                  1e13, 1e14, debye_omega_c),
    )
    # fmt: on


def _check(row: AnchorRow, computed: float, strict_tol: Optional[float]) -> bool:
    if not math.isfinite(computed):
        return False
    if strict_tol is not None:
        return abs(computed - row.quoted) <= strict_tol * abs(row.quoted)
    return row.low <= computed <= row.high


def select_rows(keys: Optional[Iterable[str]] = None) -> Tuple[AnchorRow, ...]:
    """
    Rows in table order, optionally restricted to ``keys``.

    Raises:
        BBFiberError: If a key names no row
    """
    rows = anchor_rows()
    if not keys:
        return rows
    wanted = list(keys)
    by_key: Dict[str, AnchorRow] = {row.key: row for row in rows}
    missing = [key for key in wanted if key not in by_key]
    if missing:
        raise BBFiberError(f"Unknown anchor row(s): {', '.join(missing)}")
    return tuple(row for row in rows if row.key in wanted)


def reproduce(
    keys: Optional[Sequence[str]] = None, strict_tol: Optional[float] = None
) -> List[AnchorResult]:
    results = []
    for row in select_rows(keys):
        computed = float(row.compute())
        passed = _check(row, computed, strict_tol)
        if not passed:
            logger.info("Anchor %s failed: computed %.6g, quoted %.6g", row.key, computed,
                        row.quoted)
        results.append(AnchorResult(row, computed, passed))
    return results


def list_rows(keys: Optional[Sequence[str]] = None) -> List[Tuple]:
    return [(r.key, r.label, r.quoted, r.low, r.high) for r in select_rows(keys)]
