"""
Tests for the shortest-sequence search.
"""

from fractions import Fraction

import pytest

from bbfiber.calculus import classify
from bbfiber.controls import GAMMA, GAMMA_DAG, PI, PI1, SWAP, PhaseShifter
from bbfiber.exceptions import SequenceError
from bbfiber.monomials import LINEAR, SET_A, SET_B, SET_C
from bbfiber.search import search_sequences

PHASE_ALPHABET = (PI, PI1, GAMMA, GAMMA_DAG)


def test_linear_needs_two_steps():
    """Test that [2,Pi,1,Pi] is the shortest sequence removing the linear terms."""
    result = search_sequences(LINEAR, (PI,), max_steps=4)
    assert result.found
    assert result.length == 2
    assert result.sequences[0].controls == (PI, PI)
    assert not result.truncated


def test_cyclic_solution_returns_to_start():
    """Test that a closed solution is kept although its node equals the starting node."""
    result = search_sequences(LINEAR, (PI1, PI), max_steps=3)
    assert result.length == 2
    assert [s.controls for s in result.sequences] == [(PI, PI)]

    opened = search_sequences(LINEAR, (PI1, PI), max_steps=3, require_cyclic=False)
    assert [s.controls for s in opened.sequences] == [(PI1, PI), (PI, PI)]
    for sequence in opened.sequences:
        assert classify(sequence, LINEAR).passed()


def test_linear_and_a_need_four_steps():
    """Test the minimal length for the linear terms plus set A."""
    result = search_sequences(LINEAR + SET_A, PHASE_ALPHABET, max_steps=6)
    assert result.length == 4
    for sequence in result.sequences:
        assert sequence.is_cyclic()
        assert classify(sequence, LINEAR + SET_A).passed()


def test_linear_a_b_need_eight_steps():
    """Test the minimal length for every non-number bilinear term."""
    result = search_sequences(LINEAR + SET_A + SET_B, PHASE_ALPHABET, max_steps=8)
    assert result.length == 8
    assert classify(result.sequences[0], LINEAR + SET_A + SET_B).passed()


def test_swap_alphabet_reduces_number_terms():
    """Test that a swap and its inverse average n1 and n2 in two steps."""
    result = search_sequences(SET_C, (SWAP, SWAP.inverse()), max_steps=4)
    assert result.length == 2
    assert len(result.sequences) == 1
    report = classify(result.sequences[0], SET_C)
    assert report.passed()
    assert all(v.status == "harmless" for v in report.verdicts)


def test_number_terms_need_degenerate_flag():
    """Test that phase shifters never remove n1 unless degenerate survival is accepted."""
    result = search_sequences(SET_C, (PI, PI1), max_steps=4)
    assert not result.found
    assert result.length is None

    relaxed = search_sequences(SET_C, (PI, PI1), max_steps=4, allow_degenerate=True)
    assert relaxed.length == 2


def test_open_sequences_allowed():
    """Test that dropping the cyclic requirement can only shorten the result."""
    result = search_sequences(LINEAR, (PI, PI1), max_steps=4, require_cyclic=False)
    assert result.length is not None
    assert result.length <= 2


def test_empty_targets():
    """Test that nothing to remove gives the empty sequence."""
    result = search_sequences((), (PI,), max_steps=3)
    assert result.length == 0
    assert result.sequences[0].num_segments == 0


def test_state_budget():
    """Test that the node budget stops the search with the truncated flag."""
    result = search_sequences(LINEAR + SET_A, PHASE_ALPHABET, max_steps=6, max_states=3)
    assert result.truncated
    assert result.explored_states > 3


def test_invalid_limits():
    """Test rejection of out-of-range and mistyped step limits."""
    with pytest.raises(SequenceError):
        search_sequences(LINEAR, (PI,), max_steps=21)
    with pytest.raises(TypeError):
        search_sequences(LINEAR, (PI,), max_steps="3")
    with pytest.raises(SequenceError):
        search_sequences(LINEAR, (), max_steps=2)


def test_fine_alphabet_rejected():
    """Test that alphabet angles with large denominators are refused."""
    with pytest.raises(SequenceError):
        search_sequences(LINEAR, (PhaseShifter(Fraction(1, 16), 0),), max_steps=2)
