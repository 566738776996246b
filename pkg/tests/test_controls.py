"""
Tests for control elements, sequences and their composition.
"""

from fractions import Fraction

import numpy as np
import pytest

from bbfiber.calculus import safe_sector_projector
from bbfiber.controls import (
    EIGHT_STEP,
    GAMMA,
    GAMMA_DAG,
    IDENTITY,
    OMEGA_12,
    OMEGA_1234,
    PI,
    PI1,
    PI_GAMMA,
    PI_GAMMA_DAG,
    PI_GAMMA_PI1,
    QUARTER,
    QUARTER_TURN,
    SIXTEEN_STEP,
    SWAP,
    BeamSplitter,
    ControlSequence,
    PhaseShifter,
    compose,
    to_angle,
)
from bbfiber.exceptions import SequenceError
from bbfiber.fock import FockSpace, annihilation
from bbfiber.monomials import BILINEAR, LINEAR

ANGLES = (Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(3, 2))


@pytest.fixture
def space():
    """Two modes truncated at d=4."""
    return FockSpace(2, 4)


@pytest.mark.parametrize("angle", ANGLES)
def test_phase_shifter_conjugation(space, angle):
    """Test P^dag b1 P = e^{i phi} b1 and P^dag b2 P = b2 on the truncated space."""
    u = PhaseShifter(angle, 0).unitary(space).matrix
    b1 = annihilation(space, 0).matrix
    b2 = annihilation(space, 1).matrix
    phase = np.exp(1j * np.pi * float(angle))
    assert np.max(np.abs(u.conj().T @ b1 @ u - phase * b1)) < 1e-12
    assert np.max(np.abs(u.conj().T @ b2 @ u - b2)) < 1e-12


@pytest.mark.parametrize("angle", ANGLES)
def test_phase_shifter_on_terms(space, angle):
    """Test P^dag m P = e^{-i pi phi} m for every bilinear term."""
    shifter = PhaseShifter(angle, 2 * angle)
    u = shifter.unitary(space).matrix
    for m in LINEAR + BILINEAR:
        operator = m.matrix(space).matrix
        phase = np.exp(-1j * np.pi * float(shifter.conjugation_phase(m.exponents)))
        assert np.max(np.abs(u.conj().T @ operator @ u - phase * operator)) < 1e-12


@pytest.mark.parametrize("angle", ANGLES)
def test_beam_splitter_conjugation(space, angle):
    """Test BS^dag b1 BS = cos b1 + sin b2 on the sector n1 + n2 <= d - 1."""
    splitter = BeamSplitter(angle / 2)
    u = splitter.unitary(space).matrix
    b1 = annihilation(space, 0).matrix
    b2 = annihilation(space, 1).matrix
    phi = np.pi * float(angle)
    expected = np.cos(phi) * b1 + np.sin(phi) * b2
    projector = safe_sector_projector(space)
    residual = projector @ (u.conj().T @ b1 @ u - expected) @ projector
    assert np.max(np.abs(residual)) < 1e-12

    row = splitter.mode_matrix()[0]
    np.testing.assert_allclose(row, [np.cos(phi), np.sin(phi)], atol=1e-15)


def test_angles_reduced():
    """Test angle reduction and parsing."""
    assert PhaseShifter(3, -1).angles == (Fraction(1), Fraction(1))
    assert BeamSplitter(Fraction(5, 4)).theta == Fraction(1, 4)
    assert to_angle("3/2") == Fraction(3, 2)
    with pytest.raises(SequenceError):
        to_angle("abc")


def test_named_products():
    """Test the fused shifters used by the nested sequences."""
    assert (GAMMA * GAMMA_DAG).is_identity
    fused = PI * GAMMA_DAG
    assert fused == PI_GAMMA_DAG
    assert fused.literal == "PiGd"
    assert PI * GAMMA == PI_GAMMA
    assert (PI_GAMMA * PI1).literal == "PiGPi1"
    assert PI_GAMMA * PI1 == PI_GAMMA_PI1


def test_inverse_elements(space):
    """Test that element inverses undo the unitary on the sector n1 + n2 <= d - 1."""
    projector = safe_sector_projector(space)
    for element in (GAMMA, QUARTER, SWAP, PI * SWAP):
        product = element.inverse().unitary(space).matrix @ element.unitary(space).matrix
        np.testing.assert_allclose(projector @ product @ projector, projector, atol=1e-12)
    np.testing.assert_allclose(
        GAMMA.inverse().unitary(space).matrix @ GAMMA.unitary(space).matrix,
        np.eye(16),
        atol=1e-15,
    )


def test_literal_round_order():
    """Test that literals are read right to left."""
    sequence = ControlSequence.from_items([2, PI, 1, GAMMA])
    assert sequence.controls == (GAMMA, PI)
    assert sequence.literal == "[2,Pi,1,G]"
    assert ControlSequence.from_items([2, PI, 1, PI]) == OMEGA_12


def test_trailing_element():
    """Test that a leftmost element becomes the trailing pulse."""
    sequence = ControlSequence.from_items([GAMMA_DAG, 2, PI, 1, GAMMA])
    assert sequence.trailing == GAMMA_DAG
    assert sequence.num_segments == 2
    assert sequence.literal == "[Gd,2,Pi,1,G]"


def test_bad_labels():
    """Test rejection of out-of-order segment labels."""
    with pytest.raises(SequenceError):
        ControlSequence.from_items([1, PI, 2, PI])
    with pytest.raises(SequenceError):
        ControlSequence.from_items([2, "Pi", 1, PI])
    with pytest.raises(SequenceError):
        ControlSequence(("Pi",))


def test_composed_literals():
    """Test that composition fuses adjacent pulses into the named shifters."""
    assert OMEGA_1234.literal == "[4,Pi,3,PiGd,2,Pi,1,PiG]"
    assert EIGHT_STEP.literal == (
        "[8,Pi,7,PiGd,6,Pi,5,PiGPi1,4,Pi,3,PiGd,2,Pi,1,PiGPi1]"
    )
    assert OMEGA_1234.num_segments == 4
    assert EIGHT_STEP.num_segments == 8
    assert SIXTEEN_STEP.num_segments == 16


def test_compose_matches_literal():
    """Test that composition equals the hand-written literal."""
    literal = ControlSequence.from_items(
        [4, PI, 3, PI_GAMMA_DAG, 2, PI, 1, PI_GAMMA]
    )
    assert compose(OMEGA_12, GAMMA_DAG, OMEGA_12, GAMMA) == literal


def test_cyclic():
    """Test cyclicity of the named sequences."""
    for sequence in (OMEGA_12, OMEGA_1234, EIGHT_STEP, SIXTEEN_STEP, QUARTER_TURN):
        assert sequence.is_cyclic(), sequence.name
    assert not ControlSequence((PI,)).is_cyclic()
    assert not ControlSequence((SWAP, SWAP)).is_cyclic()


def test_phase_only():
    """Test phase-only detection and cumulative shifters."""
    assert EIGHT_STEP.is_phase_only
    assert not SIXTEEN_STEP.is_phase_only
    with pytest.raises(SequenceError):
        SIXTEEN_STEP.cumulative_shifters()
    cumulative = OMEGA_1234.cumulative_shifters()
    assert cumulative[-1].is_identity
    assert cumulative[0] == PI_GAMMA


def test_period_unitary_identity(space):
    """Test that a cyclic period multiplies to the identity where passive controls are exact."""
    projector = safe_sector_projector(space)
    u = SIXTEEN_STEP.period_unitary(space).matrix
    np.testing.assert_allclose(projector @ u @ projector, projector, atol=1e-12)
    np.testing.assert_allclose(EIGHT_STEP.period_unitary(space).matrix, np.eye(16), atol=1e-15)
    assert IDENTITY.unitary(space).unitary
