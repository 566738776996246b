"""
Decoherence exponent and the largest admissible segment length.

For a bath with spectral density J(w) = alpha w^n exp(-w / w_c) the dephasing
exponent over time T is

    Gamma(T) = (1/2) int_0^inf dw J(w) coth(beta w / 2) (1 - cos w T) / w^2,

and the coherence of a bang-bang protected qubit decays as
exp(-eps tau Gamma(T)) with eps tau = (Delta / v)^2.
"""

import logging
import math
import warnings
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy import constants
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import bisect
from scipy.special import gamma as gamma_function

from bbfiber import settings
from bbfiber.exceptions import BoundError
from bbfiber.utils import handle_numeric_errors

logger = logging.getLogger(__name__)

# Integrate in u = w / w_c up to this cutoff; exp(-100) is far below any tolerance
U_MAX = 100.0
QUAD_LIMIT = 500

SPEED_OF_LIGHT_M_S = constants.c
FIBER_INDEX = 1.6
FIBER_SPEED_M_S = SPEED_OF_LIGHT_M_S / FIBER_INDEX
# Reference cutoff quoted for fused silica (Debye temperature 342 K)
DEBYE_REFERENCE_OMEGA_C = 2e13
SILICA_DEBYE_TEMPERATURE_K = 342.0

WEIGHTS = ("full", "vacuum", "thermal")


@dataclass(frozen=True)
class SpectralDensity:
    """J(w) = alpha w^n exp(-w / omega_c) with inverse temperature beta_s (inf for T = 0)."""

    n: int
    alpha: float
    omega_c_rad_s: float
    beta_s: float = math.inf

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise BoundError(f"Spectral exponent n must be an integer >= 1, got {self.n!r}")
        if not self.alpha > 0 or not math.isfinite(self.alpha):
            raise BoundError(f"alpha must be positive, got {self.alpha}")
        if not self.omega_c_rad_s > 0 or not math.isfinite(self.omega_c_rad_s):
            raise BoundError(f"omega_c must be positive, got {self.omega_c_rad_s}")
        if not self.beta_s > 0:
            raise BoundError(f"beta must be positive (inf for zero temperature), got {self.beta_s}")

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta_s)

    def __call__(self, omega: float) -> float:
        return self.alpha * omega**self.n * math.exp(-omega / self.omega_c_rad_s)

    def at_zero_temperature(self) -> "SpectralDensity":
        return replace(self, beta_s=math.inf)


@dataclass(frozen=True)
class BoundQuery:
    """
    Tolerated coherence loss delta over a link of length_m.

    T defaults to length_m / speed_m_s; ``time_s`` overrides it.
    """

    delta: float
    length_m: float = 1000.0
    speed_m_s: float = FIBER_SPEED_M_S
    time_s: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise BoundError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.length_m > 0 or not self.speed_m_s > 0:
            raise BoundError("length_m and speed_m_s must be positive")
        if self.time_s is not None and not self.time_s > 0:
            raise BoundError(f"time_s must be positive, got {self.time_s}")

    @property
    def T(self) -> float:
        return self.length_m / self.speed_m_s if self.time_s is None else self.time_s


def thermal_excess(omega: float, beta: float) -> float:
    """coth(beta w / 2) - 1 = exp(-beta w / 2) / sinh(beta w / 2), the thermal excitation term."""
    if math.isinf(beta):
        return 0.0
    y = beta * omega
    return 2.0 * math.exp(-y) if y > 700.0 else 2.0 / math.expm1(y)


def _envelope(sd: SpectralDensity, weight: str):
    """f(u) with Gamma = (alpha / 2) w_c^(n-1) int f(u) (1 - cos x u) du."""
    bw = sd.beta_s * sd.omega_c_rad_s

    def thermal_factor(u: float) -> float:
        if weight == "vacuum" or sd.zero_temperature:
            return 0.0 if weight == "thermal" else 1.0
        excess = thermal_excess(u, bw)
        return excess if weight == "thermal" else 1.0 + excess

    def envelope(u: float) -> float:
        return u ** (sd.n - 2) * math.exp(-u) * thermal_factor(u)

    return envelope


def _quad(func, a, b, **kwargs) -> float:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        value, error = quad(
            func, a, b, epsabs=0.0, epsrel=settings.QUAD_EPSREL, limit=QUAD_LIMIT, **kwargs
        )
    for warning in caught:
        logger.warning("Quadrature did not converge cleanly: %s", warning.message)
    return value


@handle_numeric_errors
def gamma_quadrature(sd: SpectralDensity, T: float, weight: str = "full") -> float:
    """
    Gamma(T) by adaptive quadrature.

    The first oscillation is integrated directly as 2 f(u) sin^2(x u / 2); the rest
    as int f - int f cos(x u) with a Fourier-weighted rule, so large x T stays stable.

    Args:
        sd: Spectral density
        T: Time in seconds, > 0
        weight: "full" (coth), "vacuum" (1) or "thermal" (coth - 1)
    """
    if not T > 0:
        raise BoundError(f"T must be positive, got {T}")
    if weight not in WEIGHTS:
        raise BoundError(f"weight must be one of {WEIGHTS}, got {weight!r}")
    if weight == "thermal" and sd.zero_temperature:
        return 0.0

    x = sd.omega_c_rad_s * T
    envelope = _envelope(sd, weight)
    split = min(U_MAX, 2.0 * math.pi / x)

    def direct(u: float) -> float:
        return 2.0 * envelope(u) * math.sin(0.5 * x * u) ** 2

    total = _quad(direct, 0.0, split)
    if split < U_MAX:
        plain = _quad(envelope, split, U_MAX)
        oscillating = _quad(envelope, split, U_MAX, weight="cos", wvar=x)
        total += plain - oscillating
    return 0.5 * sd.alpha * sd.omega_c_rad_s ** (sd.n - 1) * total


def gamma_closed_zero_T(sd: SpectralDensity, T: float) -> float:
    """
    Zero-temperature Gamma(T) in closed form, x = omega_c T:

        n = 1:  (alpha / 4) ln(1 + x^2)
        n > 1:  (alpha / 2) w_c^(n-1) Gamma(n-1) [1 - (1 + x^2)^(-(n-1)/2) cos((n-1) atan x)]

    The temperature of ``sd`` is ignored.
    """
    if not T > 0:
        raise BoundError(f"T must be positive, got {T}")
    x = sd.omega_c_rad_s * T
    if sd.n == 1:
        return 0.25 * sd.alpha * math.log1p(x * x)
    p = sd.n - 1
    bracket = 1.0 - (1.0 + x * x) ** (-0.5 * p) * math.cos(p * math.atan(x))
    return 0.5 * sd.alpha * sd.omega_c_rad_s**p * float(gamma_function(p)) * bracket


def low_T_correction(sd: SpectralDensity, T: float) -> float:
    """
    Thermal part of Gamma for beta w_c >> 1.

    Using coth - 1 ~ 2 exp(-beta w), the thermal integrand is the vacuum one with
    w_c replaced by w_c / (1 + beta w_c), doubled.
    """
    if sd.zero_temperature:
        return 0.0
    shifted = sd.omega_c_rad_s / (1.0 + sd.beta_s * sd.omega_c_rad_s)
    return 2.0 * gamma_closed_zero_T(replace(sd, omega_c_rad_s=shifted, beta_s=math.inf), T)


def gamma_low_temperature(sd: SpectralDensity, T: float) -> float:
    return gamma_closed_zero_T(sd, T) + low_T_correction(sd, T)


def thermal_split(sd: SpectralDensity, T: float) -> Tuple[float, float]:
    """(vacuum part, thermal part) of Gamma(T), both by quadrature."""
    return gamma_quadrature(sd, T, weight="vacuum"), gamma_quadrature(sd, T, weight="thermal")


def gamma_for(sd: SpectralDensity, T: float) -> float:
    """Closed form at zero temperature, quadrature otherwise."""
    if sd.zero_temperature:
        return gamma_closed_zero_T(sd, T)
    return gamma_quadrature(sd, T)


def coherence_factor(sd: SpectralDensity, T: float, epsilon_tau: float) -> float:
    """exp(-eps tau Gamma(T)), in (0, 1]."""
    if epsilon_tau < 0:
        raise BoundError(f"epsilon_tau must be nonnegative, got {epsilon_tau}")
    return math.exp(-epsilon_tau * gamma_for(sd, T))


def delta_bound(sd: SpectralDensity, query: BoundQuery, method: str = "closed") -> float:
    """
    Largest Delta with exp(-(Delta / v)^2 Gamma(T)) >= 1 - delta.

    ``closed`` solves Delta^2 = -v^2 ln(1 - delta) / Gamma(T) directly; ``implicit``
    bisects the decay condition itself.

    Raises:
        BoundError: If Gamma(T) vanishes (x = 0) or the method is unknown
    """
    T = query.T
    if sd.omega_c_rad_s * T == 0:
        raise BoundError("x = omega_c T = 0 makes the bound singular")
    gamma_value = gamma_for(sd, T)
    if not gamma_value > 0:
        raise BoundError(f"Gamma(T) = {gamma_value} gives no bound")
    v = query.speed_m_s
    log_loss = math.log1p(-query.delta)

    if method == "closed":
        return v * math.sqrt(-log_loss / gamma_value)
    if method != "implicit":
        raise BoundError(f"Unknown method {method!r}")

    def excess(delta_m: float) -> float:
        return math.exp(-((delta_m / v) ** 2) * gamma_value) - (1.0 - query.delta)

    upper = v / math.sqrt(gamma_value)
    while excess(upper) > 0:
        upper *= 2.0
    return float(bisect(excess, 0.0, upper, xtol=1e-300, rtol=1e-13, maxiter=2000))


def figure_curve(
    n: int,
    omega_c_from: float,
    omega_c_to: float,
    num_points: int,
    query: BoundQuery,
    alpha: float = 1.0,
    include_reference: bool = True,
) -> List[Tuple[float, float]]:
    """
    (omega_c, Delta) on a log-spaced grid; the reference cutoff is added when in range.

    An empty or inverted range gives an empty table.
    """
    if num_points <= 0 or omega_c_from <= 0 or omega_c_to < omega_c_from:
        return []
    grid = set(np.geomspace(omega_c_from, omega_c_to, num_points).tolist())
    if include_reference and omega_c_from <= DEBYE_REFERENCE_OMEGA_C <= omega_c_to:
        grid.add(DEBYE_REFERENCE_OMEGA_C)
    return [
        (omega_c, delta_bound(SpectralDensity(n, alpha, omega_c), query))
        for omega_c in sorted(grid)
    ]


def debye_omega_c(debye_temperature_k: float = SILICA_DEBYE_TEMPERATURE_K) -> float:
    """k_B T_D / hbar in rad/s."""
    if not debye_temperature_k > 0:
        raise BoundError("Debye temperature must be positive")
    return constants.k * debye_temperature_k / constants.hbar
