"""
Tests for utility functions and decorators.
"""

import pytest

from bbfiber.controls import OMEGA_12, PI
from bbfiber.exceptions import BBFiberError, BoundError
from bbfiber.hamiltonian import FiberModel
from bbfiber.monomials import LINEAR
from bbfiber.propagator import inhomogeneous_decay
from bbfiber.search import search_sequences
from bbfiber.utils import handle_numeric_errors, validate_input_types


def test_step_and_ensemble_counts_checked():
    """Test that search depths and ensemble sizes must be plain integers."""
    with pytest.raises(TypeError, match="max_steps must be int"):
        search_sequences(LINEAR, (PI,), max_steps=2.0)
    with pytest.raises(TypeError, match="got bool"):
        search_sequences(LINEAR, (PI,), max_steps=True)
    assert search_sequences(LINEAR, (PI,), max_steps=2).length == 2

    model = FiberModel(4, 0.25, 1.0, 1.0, 1.5, dim_per_mode=2)
    with pytest.raises(TypeError, match="ensemble_size must be int"):
        inhomogeneous_decay(model, OMEGA_12, ensemble_size="4")
    with pytest.raises(TypeError, match="got bool"):
        inhomogeneous_decay(model, OMEGA_12, ensemble_size=False)


def test_validate_input_types_keyword_and_positional():
    """Test that a segment count is checked whether passed by position or keyword."""

    @validate_input_types(num_segments=int)
    def periods(sequence_length, num_segments):
        return num_segments // sequence_length

    assert periods(2, 16) == 8
    assert periods(8, num_segments=64) == 8
    with pytest.raises(TypeError, match="got float"):
        periods(2, 16.0)
    with pytest.raises(TypeError, match="got bool"):
        periods(2, num_segments=True)


def test_validate_input_types_allows_none():
    """Test that None passes through for optional parameters."""

    @validate_input_types(size=int)
    def sized(size=None):
        return size

    assert sized() is None
    assert sized(size=3) == 3


def test_handle_numeric_errors():
    """Test that arithmetic failures become toolkit errors naming the function."""

    @handle_numeric_errors
    def cutoff_ratio(omega_c):
        return 1.0 / omega_c

    @handle_numeric_errors
    def bad_bound():
        raise BoundError("Gamma(T) = 0 gives no bound")

    assert cutoff_ratio(2.0) == 0.5
    with pytest.raises(BoundError):
        bad_bound()
    with pytest.raises(BBFiberError, match="cutoff_ratio"):
        cutoff_ratio(0.0)
