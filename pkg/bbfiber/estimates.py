"""
Back-of-envelope shifter counts for a lossy link.

With per-segment loss amplitude l over N segments, the binomial approximation
l N = 1 - transmission fixes N once the residual error is fixed:
    linear terms removed:    error ~ l^2 N, two shifters per segment
    bilinear terms removed:  error ~ l^3 N, eight shifters per segment
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from bbfiber.exceptions import BoundError

SHIFTERS_PER_SEGMENT = {"linear": 2, "bilinear": 8}


@dataclass(frozen=True)
class RoughEstimate:
    order: str
    loss_per_segment: float
    num_segments: float
    shifter_count: float
    delta_m: float
    target: float
    transmission: float
    span_m: float

    @property
    def residual_error(self) -> float:
        power = 2 if self.order == "linear" else 3
        return self.loss_per_segment**power * self.num_segments


def _exact(value: float, name: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, float, Fraction)):
        raise BoundError(f"{name} must be a number, got {value!r}")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise BoundError(f"{name} must be finite, got {value}")
        return Fraction(str(value))
    return Fraction(value)


def rough_estimate(
    order: str = "linear",
    target: float = 1e-4,
    transmission: float = 0.95,
    span_m: float = 1000.0,
) -> RoughEstimate:
    """
    Shifter count and spacing needed to push the residual error down to ``target``.

    Linear inputs are handled in exact rational arithmetic, so the default
    case gives l = 2e-3, N = 25, 50 shifters, Delta = 20 m exactly.
    """
    if order not in SHIFTERS_PER_SEGMENT:
        raise BoundError(f"order must be one of {sorted(SHIFTERS_PER_SEGMENT)}, got {order!r}")
    target_q = _exact(target, "target")
    transmission_q = _exact(transmission, "transmission")
    span_q = _exact(span_m, "span_m")
    if not 0 < transmission_q < 1:
        raise BoundError(f"transmission must lie in (0, 1), got {transmission}")
    if target_q <= 0 or span_q <= 0:
        raise BoundError("target and span_m must be positive")

    loss = 1 - transmission_q
    per_segment = SHIFTERS_PER_SEGMENT[order]
    if order == "linear":
        l_q = target_q / loss
        n_q = loss / l_q
        count_q = per_segment * n_q
        l, n, count, delta = float(l_q), float(n_q), float(count_q), float(span_q / count_q)
    else:
        l = math.sqrt(target_q / loss)
        n = float(loss) / l
        count = per_segment * n
        delta = float(span_q) / count

    return RoughEstimate(
        order=order,
        loss_per_segment=l,
        num_segments=n,
        shifter_count=count,
        delta_m=delta,
        target=float(target_q),
        transmission=float(transmission_q),
        span_m=float(span_q),
    )


def rough_estimate_linear(
    target: float = 1e-4, transmission: float = 0.95, span_m: float = 1000.0
) -> RoughEstimate:
    return rough_estimate("linear", target, transmission, span_m)


def rough_estimate_bilinear(
    target: float = 1e-4, transmission: float = 0.95, span_m: float = 1000.0
) -> RoughEstimate:
    return rough_estimate("bilinear", target, transmission, span_m)
