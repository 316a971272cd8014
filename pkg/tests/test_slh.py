import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from giantatoms.operators import MasterEquationGenerator, sigma_minus, sigma_z
from giantatoms.slh import (DriveSpec, SingularFeedbackError, SlhTriplet, attach_drive, component,
                            concatenate, drive_output_offsets, feedback, phase_shift, series,
                            series_chain)
from giantatoms.simulator import steady_state


def random_triplet(rng, n_ports, d):
    q, _ = np.linalg.qr(rng.normal(size=(n_ports, n_ports)) + 1j * rng.normal(size=(n_ports, n_ports)))
    L = rng.normal(size=(n_ports, d, d)) + 1j * rng.normal(size=(n_ports, d, d))
    H = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return SlhTriplet(q, L, H + H.conj().T)


def assert_same(a, b, atol=1e-11):
    np.testing.assert_allclose(a.S, b.S, atol=atol)
    np.testing.assert_allclose(a.L, b.L, atol=atol)
    np.testing.assert_allclose(a.H, b.H, atol=atol)


def test_two_small_atoms_right_movers():
    # b <| phi <| a for one direction: L = e^{i phi} sqrt(ga/2) s_a + sqrt(gb/2) s_b
    ga, gb, phi = 0.7, 1.3, 0.4
    sa, sb = sigma_minus(0, 2), sigma_minus(1, 2)
    g = series_chain(component(np.sqrt(gb / 2) * sb), phase_shift(phi, 4),
                     component(np.sqrt(ga / 2) * sa))
    np.testing.assert_allclose(g.S, [[np.exp(1j * phi)]])
    np.testing.assert_allclose(g.L[0], np.exp(1j * phi) * np.sqrt(ga / 2) * sa + np.sqrt(gb / 2) * sb)
    # (1/2i)(L2^+ S2 L1 - h.c.) with X = s_b^+ s_a; one direction alone keeps a cos(phi) part
    X = sb.conj().T @ sa
    expected = np.sqrt(ga * gb) / 4 * (np.exp(1j * phi) * X - np.exp(-1j * phi) * X.conj().T) / 1j
    np.testing.assert_allclose(g.H, expected, atol=1e-15)


def test_hermiticity_check():
    with pytest.raises(ValueError, match="Hermitian"):
        SlhTriplet(np.eye(1), np.zeros((1, 2, 2)), np.array([[0, 1], [0, 0]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_series_is_associative(n_ports, seed):
    rng = np.random.default_rng(seed)
    g1, g2, g3 = (random_triplet(rng, n_ports, 4) for _ in range(3))
    assert_same(series(g3, series(g2, g1)), series(series(g3, g2), g1))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_feedback_of_concatenation_is_series(seed):
    rng = np.random.default_rng(seed)
    g1, g2 = (random_triplet(rng, 1, 4) for _ in range(2))
    # wire the output of g1 (port 0) into the input of g2 (port 1)
    assert_same(feedback(concatenate(g1, g2), 0, 1), series(g2, g1))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_composition_keeps_s_unitary(seed):
    rng = np.random.default_rng(seed)
    g1, g2 = (random_triplet(rng, 2, 2) for _ in range(2))
    assert series(g2, g1).is_unitary()
    assert concatenate(g1, g2).is_unitary()


def test_feedback_errors():
    g = SlhTriplet(np.eye(2)[::-1], np.zeros((2, 2, 2)), np.zeros((2, 2)))
    with pytest.raises(SingularFeedbackError):
        feedback(g, 0, 1)
    with pytest.raises(IndexError):
        feedback(g, 0, 2)


def test_series_port_mismatch():
    with pytest.raises(ValueError):
        series(phase_shift(0.1, 2, 2), phase_shift(0.1, 2, 1))


def driven_qubit(gamma, delta, alpha):
    """Weak-drive-exact steady state of a qubit driven through one port."""
    g = component(np.sqrt(gamma) * sigma_minus(0, 1))
    drive = DriveSpec(alpha, omega_d=delta)
    d = attach_drive(g, drive)
    rho = steady_state(MasterEquationGenerator(d.H, tuple(d.L)))
    return g, d, rho, drive


def test_attach_drive_matches_optical_bloch():
    # H = -delta sz/2 + i sqrt(gamma)(alpha* s - alpha s^+), the input-output drive term
    gamma, delta, alpha = 1.0, 0.3, 0.2
    _, d, rho, _ = driven_qubit(gamma, delta, alpha)
    sm = sigma_minus(0, 1)
    omega = np.sqrt(gamma) * alpha
    H = -delta * sigma_z(0, 1) / 2 + 1j * (np.conj(omega) * sm - omega * sm.conj().T)
    H -= np.trace(H) / 2 * np.eye(2)
    np.testing.assert_allclose(d.H, H, atol=1e-14)
    # Bloch equations: d<s>/dt = (i delta - gamma/2) <s> + Omega <sz> = 0
    s = np.trace(sm @ rho)
    sz = np.trace(sigma_z(0, 1) @ rho)
    np.testing.assert_allclose(s, 2 * omega * sz / (gamma - 2j * delta), atol=1e-12)
    # and dp_e/dt = -gamma p_e - 2 Re(Omega^* <s>) = 0
    pe = rho[1, 1].real
    np.testing.assert_allclose(gamma * pe, -2 * np.real(np.conj(omega) * s), atol=1e-12)


def test_drive_output_offsets():
    g = concatenate(phase_shift(0.5, 2), phase_shift(0.5, 2))
    np.testing.assert_allclose(drive_output_offsets(g, DriveSpec(2.0)), [2 * np.exp(0.5j), 0])
    with pytest.raises(IndexError):
        drive_output_offsets(g, DriveSpec(1.0, port=3))
