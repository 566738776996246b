"""
Tests for survival weights, classification and the matrix oracle.
"""

import itertools
import logging
from fractions import Fraction

import pytest

from bbfiber.calculus import (
    CyclotomicBasis,
    alternation_sequence,
    classify,
    cumulative_phases,
    matrix_check,
    parity_eliminated,
    phase_of,
    projected_norm,
    survival_weight,
)
from bbfiber.controls import (
    EIGHT_STEP,
    GAMMA,
    GAMMA_DAG,
    IDENTITY_SEQUENCE,
    OMEGA_12,
    OMEGA_1234,
    PI,
    PI1,
    QUARTER,
    QUARTER_TURN,
    SIXTEEN_STEP,
    SWAP,
    BeamSplitter,
    ComposedControl,
    ControlSequence,
    PhaseShifter,
)
from bbfiber.exceptions import SequenceError
from bbfiber.fock import FockSpace
from bbfiber.monomials import BILINEAR, LINEAR, SET_A, SET_B, SET_C, term

PHASE_SEQUENCES = (OMEGA_12, OMEGA_1234, EIGHT_STEP, IDENTITY_SEQUENCE, QUARTER_TURN)

# every exponent <= 2; n1 + n2 <= 4 keeps each of them nonzero on the safe sector
LOW_TERMS = tuple(term(*e) for e in itertools.product(range(3), repeat=4))
SWEEP_SPACE = FockSpace(2, 5)


def _assert_classified_like_matrix(sequence):
    for verdict in classify(sequence, LOW_TERMS).verdicts:
        m, weight = verdict.term, verdict.weight
        norm = matrix_check(sequence, m, SWEEP_SPACE)
        if weight.eliminated:
            assert norm < 1e-9, (sequence.literal, m.label)
        else:
            expected = weight.magnitude * projected_norm(m, SWEEP_SPACE)
            assert norm == pytest.approx(expected, rel=1e-9), (sequence.literal, m.label)


def test_phase_of():
    """Test the conjugation phase of single terms."""
    assert phase_of(PI, term(0, 1, 0, 0)) == 1
    assert phase_of(GAMMA, term(1, 0, 0, 1)) == 1
    assert phase_of(PI, term(1, 1, 0, 0)) == 0
    with pytest.raises(SequenceError):
        phase_of(SWAP, term(0, 1, 0, 0))


def test_omega12_eliminates_linear_only():
    """Test that [2,Pi,1,Pi] removes the linear terms and none of A or B."""
    report = classify(OMEGA_12, LINEAR + SET_A + SET_B)
    assert set(report.eliminated) == set(LINEAR)
    assert len(report.surviving) == len(SET_A) + len(SET_B)
    for _, weight in report.surviving:
        assert weight.gaussian == (2, 0)


def test_omega1234_leaves_counter_rotating():
    """Test that the nested 4-step removes linear and A but not B."""
    report = classify(OMEGA_1234, LINEAR + SET_A + SET_B)
    assert set(report.eliminated) == set(LINEAR + SET_A)
    for m in SET_B:
        weight = survival_weight(OMEGA_1234, m)
        assert not weight.eliminated
        assert weight.magnitude == pytest.approx(4.0)
        assert weight.gaussian == (4, 0)


def test_eight_step_eliminates_linear_a_b():
    """Test that the 8-step sequence removes every non-number term."""
    report = classify(EIGHT_STEP, LINEAR + SET_A + SET_B)
    assert report.passed()
    assert report.cyclic
    assert len(report.eliminated) == 12


def test_number_terms_survive_phase_sequences():
    """Test that n1 and n2 survive every phase-shifter sequence as degenerate-harmless."""
    for sequence in PHASE_SEQUENCES:
        report = classify(sequence, SET_C)
        assert not report.eliminated
        assert all(v.status == "degenerate-harmless" for v in report.verdicts)
        assert not report.passed()
        assert report.passed(allow_degenerate=True)


def test_sixteen_step_reduces_number_terms():
    """Test that the beam-splitter sequence averages n1 and n2 into the total number."""
    report = classify(SIXTEEN_STEP, LINEAR + BILINEAR)
    assert report.passed()
    statuses = {v.term: v.status for v in report.verdicts}
    for m in SET_C:
        assert statuses[m] == "harmless"
        weight = survival_weight(SIXTEEN_STEP, m)
        assert weight.image[(1, 1, 0, 0)] == pytest.approx(8.0)
        assert weight.image[(0, 0, 1, 1)] == pytest.approx(8.0)
    for m in LINEAR + SET_A + SET_B:
        assert statuses[m] == "eliminated"


@pytest.mark.parametrize("sequence", PHASE_SEQUENCES + (SIXTEEN_STEP,))
def test_symbolic_and_matrix_agree(sequence):
    """Test that the exact weights and the Fock-matrix sums agree term by term."""
    for m in LINEAR + SET_A + SET_B:
        weight = survival_weight(sequence, m)
        norm = matrix_check(sequence, m)
        if weight.eliminated:
            assert norm < 1e-9
        else:
            assert norm == pytest.approx(weight.magnitude * projected_norm(m), rel=1e-9)


@pytest.mark.parametrize("length", range(1, 9))
def test_exhaustive_parity_kicks(length):
    """Test classify against the Fock-matrix sums for every Pi/Pi1 sequence of one length."""
    for controls in itertools.product((PI, PI1), repeat=length):
        _assert_classified_like_matrix(ControlSequence(controls))


def test_exhaustive_quarter_phases():
    """Test classify against the Fock-matrix sums for short sequences with Gamma pulses."""
    for length in range(1, 4):
        for controls in itertools.product((PI, PI1, GAMMA, GAMMA_DAG), repeat=length):
            _assert_classified_like_matrix(ControlSequence(controls))


@pytest.mark.parametrize("sequence", PHASE_SEQUENCES)
def test_gaussian_and_float_paths_agree(sequence):
    """Test exact Gaussian weights against the mpmath value and the mode-matrix image."""
    # an identity beam splitter forces the image path without changing any frame
    first = sequence.controls[0]
    pad = BeamSplitter(0) if first is None else ComposedControl((BeamSplitter(0), first))
    padded = ControlSequence((pad,) + sequence.controls[1:], sequence.trailing)
    assert not padded.is_phase_only
    for m in LOW_TERMS:
        exact = survival_weight(sequence, m)
        image = survival_weight(padded, m)
        assert exact.gaussian is not None
        re, im = exact.gaussian
        assert exact.value == pytest.approx(complex(re, im), abs=1e-12)
        assert image.eliminated == exact.eliminated
        assert image.value == pytest.approx(complex(re, im), abs=1e-12)
        assert set(image.image) <= {m.exponents}


def test_non_cyclic_warning(caplog):
    """Test that an open sequence is evaluated but flagged."""
    with caplog.at_level(logging.WARNING, logger="bbfiber.calculus"):
        weight = survival_weight(ControlSequence((PI,)), term(0, 1, 0, 0))
    assert weight.warnings
    assert "not cyclic" in caplog.text
    assert weight.gaussian == (-1, 0)


def test_empty_sequence_rejected():
    """Test that a sequence without segments has no survival weight."""
    with pytest.raises(SequenceError):
        survival_weight(ControlSequence(), term(0, 1, 0, 0))
    with pytest.raises(SequenceError):
        matrix_check(ControlSequence(), term(0, 1, 0, 0))


def test_cube_roots_exact():
    """Test an exact decision with a denominator that is not a power of two."""
    sequence = ControlSequence((PhaseShifter(Fraction(1, 3), 0),) * 6)
    assert sequence.is_cyclic()
    assert survival_weight(sequence, term(0, 1, 0, 0)).eliminated
    weight = survival_weight(sequence, term(0, 0, 0, 1))
    assert not weight.eliminated
    assert weight.magnitude == pytest.approx(6.0)


def test_fine_angles_numeric():
    """Test the high-precision fallback for denominators above 8."""
    sequence = ControlSequence((PhaseShifter(Fraction(1, 16), 0),) * 32)
    weight = survival_weight(sequence, term(0, 1, 0, 0))
    assert weight.eliminated
    assert weight.exact is None


def test_cyclotomic_basis_vanishing():
    """Test that 1 + zeta^2 + zeta^4 vanishes for zeta = exp(i pi / 3)."""
    basis = CyclotomicBasis(3)
    counts = [1, 0, 1, 0, 1, 0]
    assert not any(basis.reduce(counts))
    assert any(basis.reduce([1, 1, 0, 0, 0, 0]))


def test_parity_shortcut():
    """Test that odd-degree terms are exactly those removed by the parity kick."""
    for m in LINEAR + BILINEAR + (term(2, 1, 0, 0),):
        assert parity_eliminated(m) == survival_weight(OMEGA_12, m).eliminated


def test_alternation_sequence():
    """Test the single-mode quarter-turn alternation for b1^dag^2 b2^2."""
    m = term(2, 0, 0, 2)
    sequence = alternation_sequence(m)
    assert sequence.controls == (QUARTER,) * 4
    assert sequence.is_cyclic()
    assert survival_weight(sequence, m).eliminated
    assert not survival_weight(EIGHT_STEP, m).eliminated
    with pytest.raises(SequenceError):
        alternation_sequence(term(1, 1, 0, 0))


def test_cumulative_phases():
    """Test the per-segment phases of b1 under [2,Pi,1,Pi]."""
    assert cumulative_phases(OMEGA_12, term(0, 1, 0, 0)) == [1, 0]
