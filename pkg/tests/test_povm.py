import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from belldice.errors import DegenerateMeasurementError, InvalidParameterError
from belldice.oracle import displaced_noclick_operator
from belldice.povm import (
    PAULI,
    TRAJECTORY_HEADER,
    DisplacedClickDetector,
    bloch_trajectory,
    extremal_decomposition,
    povm_qubit_matrix,
    write_trajectory_csv,
)

etas = st.floats(0.01, 1.0)
amps = st.floats(0.0, 4.0)
phases = st.floats(-math.pi, math.pi)


def test_undisplaced_is_diagonal():
    pair = povm_qubit_matrix(DisplacedClickDetector(0.0, eta=0.7))
    assert np.allclose(pair.p0, np.diag([1.0, 0.3]), atol=1e-15)
    assert np.allclose(pair.pc, np.diag([0.0, 0.7]), atol=1e-15)


def test_unit_displacement_ideal_detector():
    pair = povm_qubit_matrix(DisplacedClickDetector(1.0, eta=1.0))
    assert np.allclose(pair.p0, math.exp(-1.0) * np.array([[1, -1], [-1, 1]]), atol=1e-15)


@given(a=st.floats(0.0, 2.0), delta=phases, eta=etas)
@settings(max_examples=40, deadline=None)
def test_qubit_block_matches_numerical_displacement(a, delta, eta):
    det = DisplacedClickDetector(a, delta, eta)
    full = displaced_noclick_operator(det.alpha, eta, n_max=1, padding=40)
    assert np.allclose(povm_qubit_matrix(det).p0, full, atol=1e-12)


def test_zero_displacement_decomposition():
    dec = extremal_decomposition(DisplacedClickDetector(0.0, eta=0.7))
    assert dec.mu == pytest.approx(0.7, abs=1e-15)
    assert np.allclose(dec.n_vec, [0, 0, 1])
    assert dec.r0 == pytest.approx(1.0)


def test_mu_grows_at_small_displacement():
    # independent 40-digit evaluation of the mu formula
    dec = extremal_decomposition(DisplacedClickDetector(0.5, eta=0.7))
    assert dec.mu == pytest.approx(0.76178412045928160, rel=1e-14)
    assert dec.n_vec[0] < 0.0


@given(a=amps, delta=phases, eta=etas)
@settings(max_examples=200, deadline=None)
def test_reconstruction(a, delta, eta):
    det = DisplacedClickDetector(a, delta, eta)
    dec = extremal_decomposition(det)
    pair = povm_qubit_matrix(det)
    assert np.allclose(dec.reconstruct_p0(), pair.p0, atol=1e-12, rtol=0)
    assert np.linalg.norm(dec.n_vec) == pytest.approx(1.0, abs=1e-12)
    assert 0.0 <= dec.mu <= 1.0 + 1e-15
    assert 0.0 <= dec.r0 <= 1.0
    assert dec.rc == pytest.approx(1.0 - dec.r0)


@given(a=amps, delta=phases, eta=etas)
@settings(max_examples=100, deadline=None)
def test_povm_elements_are_positive(a, delta, eta):
    pair = povm_qubit_matrix(DisplacedClickDetector(a, delta, eta))
    for m in (pair.p0, pair.pc):
        assert np.allclose(m, m.conj().T)
        assert np.linalg.eigvalsh(m).min() > -1e-12


def test_bloch_vector_from_pauli_components():
    det = DisplacedClickDetector(0.8, 0.6, 0.85)
    p0 = povm_qubit_matrix(det).p0
    dec = extremal_decomposition(det)
    # P0 = (mu/2) n.sigma + identity part
    comps = [np.trace(p0 @ s).real for s in PAULI]
    assert np.allclose(comps, dec.mu * dec.n_vec, atol=1e-14)
    assert dec.n_vec[1] < 0.0  # delta in (0, pi) tilts n toward -y


def test_trajectory_limits():
    traj = np.array(bloch_trajectory(1.0, np.linspace(0.0, 4.0, 401)))
    lengths = np.linalg.norm(traj, axis=1)
    assert lengths[0] == pytest.approx(1.0)
    assert np.allclose(traj[0], [0, 0, 1])
    assert lengths[-1] < 0.01
    assert np.allclose(traj[:, 1], 0.0)


def test_trajectory_rotates_toward_minus_x():
    traj = bloch_trajectory(0.7, [0.0, 0.5])
    assert np.linalg.norm(traj[0]) == pytest.approx(0.7)
    assert np.linalg.norm(traj[1]) == pytest.approx(0.7617841204592816, rel=1e-13)
    assert traj[1][0] < 0.0


def test_trajectory_csv():
    buf = io.StringIO()
    write_trajectory_csv(buf, 0.7, np.linspace(0, 4, 5))
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(TRAJECTORY_HEADER)
    assert len(lines) == 6
    assert buf.getvalue().endswith("\n")
    assert "-0," not in buf.getvalue()


def test_degenerate_and_invalid():
    with pytest.raises(DegenerateMeasurementError):
        extremal_decomposition(DisplacedClickDetector(1.0, eta=0.0))
    with pytest.raises(InvalidParameterError):
        DisplacedClickDetector(-0.1)
    with pytest.raises(InvalidParameterError):
        DisplacedClickDetector(0.1, eta=1.2)
