import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nvphase.errors import DegenerateError, SingularParameterError
from nvphase.frames import (analytic_u, cos_theta_approx, speed_tiers, gate_speed, h1_rotating_frame,
                            h2_effective, prepare_input, rotated_paulis, static_eigensystem, u1,
                            v1_perturbation)
from nvphase.hamiltonian import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, h_static
from nvphase.linalg import dagger, eig_hermitian, expm_unitary, kron
from nvphase.model import SpinConstants, StaticFields, to_angular
from nvphase.frames import lab_drive
from nvphase.validation import (chain_evolution_residual, h1_decomposition_residual,
                                interaction_constancy_residual, u1_form_residual)


def test_rotated_paulis_algebra():
    for phi in (0.0, 0.4, -2.1):
        sx, sy, sz = rotated_paulis(phi)
        assert np.allclose(sx @ sy - sy @ sx, 2j * sz)
        assert np.allclose(sz, -math.sin(phi) * SIGMA_X + math.cos(phi) * SIGMA_Y)


def test_u1_basic_cases():
    assert np.allclose(u1(0.0, 0.7, 3.0), np.eye(2))
    w, t = 2.5, 0.3
    assert np.allclose(u1(t, 0.0, w), expm_unitary(0.5 * w * SIGMA_Y, t))


@settings(max_examples=30, deadline=None)
@given(t=st.floats(0, 5), phi=st.floats(-math.pi, math.pi), w=st.floats(0.1, 500))
def test_u1_forms_agree(t, phi, w):
    assert u1_form_residual(t, phi, w) < 1e-12


def test_h1_decomposition_finite_difference():
    # Central difference with a 1e-6 us step, moderate omega.
    w1, w, phi, a, t = 1.3, 20.0, 0.8, 0.9, 0.37
    dt = 1e-6
    u = kron(u1(t, phi, w), I2)
    du = (kron(u1(t + dt, phi, w), I2) - kron(u1(t - dt, phi, w), I2)) / (2 * dt)
    moved = dagger(u) @ lab_drive(w1, w, phi, t, a) @ u - 1j * dagger(u) @ du
    expected = kron(h1_rotating_frame(w1, w, phi), I2) + v1_perturbation(t, w, phi, a)
    assert np.max(np.abs(moved - expected)) < 1e-6


@settings(max_examples=20, deadline=None)
@given(t=st.floats(0, 2), w1=st.floats(0, 10), w=st.floats(10, 400),
       phi=st.floats(-math.pi, math.pi), a=st.floats(0, 3))
def test_h1_decomposition(t, w1, w, phi, a):
    assert h1_decomposition_residual(t, w1, w, phi, a) < 1e-6


def test_h1_cases():
    w, phi = 4.0, 0.3
    assert np.allclose(h1_rotating_frame(0.0, w, phi), -0.5 * w * rotated_paulis(phi)[2])
    w1 = 1.1
    ev = eig_hermitian(h1_rotating_frame(w1, w, phi))[0]
    assert np.allclose(ev, [-math.hypot(w1, w / 2), math.hypot(w1, w / 2)])


def test_h2_zero_detuning():
    res = h2_effective(3.0, 100.0, 6.0)
    assert res.delta == 0.0
    assert np.allclose(res.exact, res.approx)
    assert np.allclose(res.plus, np.array([1j, 1]) / math.sqrt(2))
    assert np.allclose(res.minus, np.array([1, 1j]) / math.sqrt(2))


def test_h2_first_order_eigenvectors():
    w, wp = 100.0, 6.0
    residuals = []
    for delta in (1e-3, 5e-4):
        w1 = wp / 2 + delta * w / 2
        res = h2_effective(w1, w, wp)
        for v in (res.plus, res.minus):
            lam = np.vdot(v, res.exact @ v).real
            residuals.append(np.linalg.norm(res.exact @ v - lam * v) / w)
    # Residual scales as delta^2.
    assert residuals[0] < 1e-5
    assert residuals[0] / residuals[2] == pytest.approx(4.0, rel=0.05)


@settings(max_examples=10, deadline=None)
@given(w=st.floats(50, 400), wp=st.floats(1, 10), a=st.floats(0.1, 3), phi0=st.floats(-3, 3))
def test_interaction_picture_constant(w, wp, a, phi0):
    assert interaction_constancy_residual(np.linspace(0, 2, 5), w, wp, a, phi0) < 1e-6


def test_chain_composition_matches_closed_form():
    assert chain_evolution_residual(0.8, 200.0, 5.0, 1.2) < 1e-6


def test_analytic_u_cases():
    assert np.allclose(analytic_u(0.0, 3.0, 1.0), np.eye(4))
    t, wp, a = 0.2, 2.0, 1.5
    assert np.angle(analytic_u(t, wp, a)[0, 0]) == pytest.approx(-wp * t / 2 - a * t / 2)
    u = analytic_u(2 * math.pi / wp, wp, 0.0)
    assert np.allclose(u, -np.eye(4))


def test_static_eigensystem_examples(consts):
    es = static_eigensystem(consts, StaticFields(dE0=0.0))
    assert es.theta_up == es.theta_down == 0.0
    s = StaticFields()
    es = static_eigensystem(consts, s)
    h = h_static(consts, s)
    v = es.eigenvectors
    assert np.max(np.abs(dagger(v) @ v - np.eye(4))) < 1e-10
    assert np.max(np.abs((v * es.eigenvalues) @ dagger(v) - h)) < 1e-10
    b, e, a = to_angular(20.0), to_angular(4.0), to_angular(3.03)
    closed = sorted([math.hypot(b + a / 2, e), math.hypot(b - a / 2, e),
                     -math.hypot(b + a / 2, e), -math.hypot(b - a / 2, e)])
    assert np.max(np.abs(np.sort(es.eigenvalues) - closed)) < 1e-12
    assert np.max(np.abs(eig_hermitian(h)[0] - closed)) < 1e-12
    approx_up = cos_theta_approx(consts, s)[0]
    assert approx_up == pytest.approx(1 - 0.5 * (4 / 21.515) ** 2, abs=1e-5)
    assert math.cos(es.theta_up) == pytest.approx(approx_up, abs=1e-3)


def test_static_eigensystem_degenerate():
    with pytest.raises(DegenerateError):
        static_eigensystem(SpinConstants(A_par_N=0.0), StaticFields(gammaB0=0.0, dE0=0.0))


def test_prepare_input(consts):
    psi = prepare_input(consts, StaticFields(dE0=0.0))
    assert np.allclose(psi.vector, np.array([1, 1, 0, 0]) / math.sqrt(2))
    s = StaticFields()
    psi = prepare_input(consts, s)
    assert np.linalg.norm(psi.vector) == pytest.approx(1.0, abs=1e-12)
    w, v = eig_hermitian(h_static(consts, s))
    upper = v[:, 2:]
    assert np.linalg.norm(dagger(upper) @ psi.vector) == pytest.approx(1.0, abs=1e-10)


def test_gate_speed_anchor(consts, fields):
    rep = gate_speed(consts, fields, 1000.0)
    assert rep.pi_gate_time == pytest.approx(0.165, rel=0.02)
    assert rep.geometric_part == pytest.approx(rep.approx - to_angular(consts.A_par_N))


def test_gate_speed_no_electric_field(consts):
    rep = gate_speed(consts, StaticFields(dE0=0.0), 1000.0)
    assert rep.geometric_part == 0.0
    assert rep.exact == pytest.approx(to_angular(consts.A_par_N))
    assert rep.pi_gate_time == math.inf


def test_gate_speed_singular(consts):
    with pytest.raises(SingularParameterError):
        gate_speed(consts, StaticFields(gammaB0=consts.A_par_N / 2), 1000.0)


def test_tiers_agree_in_large_field(consts):
    # Inside E/B <= 0.1 and A/B <= 0.1 the two tiers agree to 1 %.
    for gb, de in [(40.0, 4.0), (60.0, 6.0), (100.0, 2.0)]:
        ex, ap = speed_tiers(consts, gb, de, 1000.0)
        assert abs(ex - ap) / ap < 0.01


def test_tier_gap_shrinks_quadratically(consts):
    # Raising B0 at fixed E0 and A shrinks both field ratios as 1/k.
    scales = np.array([1.0, 2.0, 4.0, 8.0])
    gaps = []
    for k in scales:
        gb = 20.0 * k
        ex, ap = speed_tiers(consts, gb, 4.0, 1000.0)
        gaps.append(abs(ex - ap) / abs(ap))
    ratio = np.array([(consts.A_par_N / (20 * k)) ** 2 + (4.0 / (20 * k)) ** 2 for k in scales])
    slope = np.polyfit(np.log(ratio), np.log(gaps), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.1)
