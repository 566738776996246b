"""
Tests for the shifter-count estimates.
"""

import math

import pytest

from bbfiber.estimates import rough_estimate, rough_estimate_bilinear, rough_estimate_linear
from bbfiber.exceptions import BoundError


def test_linear_estimate_exact():
    """Test the linear path: l = 2e-3, N = 25, 50 shifters, 20 m spacing."""
    estimate = rough_estimate_linear()
    assert estimate.loss_per_segment == 2e-3
    assert estimate.num_segments == 25.0
    assert estimate.shifter_count == 50.0
    assert estimate.delta_m == 20.0
    assert estimate.residual_error == pytest.approx(1e-4)


def test_bilinear_estimate():
    """Test the bilinear path: N = 5 / sqrt(20) and a spacing near 110 m."""
    estimate = rough_estimate_bilinear()
    assert abs(estimate.num_segments - 5.0 / math.sqrt(20.0)) < 1e-3
    assert 90.0 <= estimate.delta_m <= 112.0
    assert estimate.shifter_count == pytest.approx(8 * estimate.num_segments)
    assert estimate.residual_error == pytest.approx(1e-4)


def test_estimate_scales_with_target():
    """Test that a tighter target needs more shifters."""
    loose = rough_estimate("linear", target=1e-4)
    tight = rough_estimate("linear", target=1e-5)
    assert tight.shifter_count == pytest.approx(10 * loose.shifter_count)
    assert tight.delta_m < loose.delta_m


def test_estimate_errors():
    """Test rejection of invalid orders and inputs."""
    with pytest.raises(BoundError):
        rough_estimate("cubic")
    with pytest.raises(BoundError):
        rough_estimate("linear", transmission=1.0)
    with pytest.raises(BoundError):
        rough_estimate("linear", target=0.0)
    with pytest.raises(BoundError):
        rough_estimate("linear", target="small")
    with pytest.raises(BoundError):
        rough_estimate("bilinear", span_m=math.nan)
    with pytest.raises(BoundError):
        rough_estimate("linear", target=True)
