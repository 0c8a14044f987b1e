import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maggates.atomic import breit_rabi_levels
from maggates.constants import CONSTANTS
from maggates.gates import (
    SIGMA_X,
    UnsupportedConfigurationError,
    ac_zeeman_shifts,
    anharmonic_suppression,
    carrier_rotation,
    electric_equivalence_potential,
    gate_time_for_current,
    geometric_phase_propagator,
    phase_space_trajectory,
    pi_time,
    sigma_phiphi_gate,
)


def test_carrier_pi_pulse():
    Om = 2 * math.pi * 2.5e5
    U = carrier_rotation(Om, 0.0, pi_time(Om))
    down = np.array([0, 1])
    assert abs((U @ down)[0]) ** 2 == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(carrier_rotation(Om, 0.0, 0.3e-6), np.cos(Om * 0.3e-6) * np.eye(2) + 1j * np.sin(Om * 0.3e-6) * SIGMA_X)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e2, 1e6), st.floats(0.5, 8.0), st.sampled_from([1, -1]))
def test_phase_equals_enclosed_area(Om, ratio, sign):
    delta = sign * ratio * Om
    t = np.linspace(0, 2 * math.pi / abs(delta), 20001)
    a = phase_space_trajectory(Om, delta, t)
    # Im of the loop integral of conj(alpha) d alpha, trapezoid rule
    da = np.diff(a)
    mid = 0.5 * (a[1:] + a[:-1])
    area_phase = np.sum(np.imag(np.conj(mid) * da)) * np.sign(delta)
    assert area_phase == pytest.approx(2 * math.pi * Om**2 / delta**2, rel=1e-6)
    assert abs(a[-1]) <= 1e-10 * np.max(np.abs(a))


@settings(max_examples=50, deadline=None)
@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(1e3, 4e6), st.one_of(st.none(), st.floats(-3.2, 3.2)))
def test_propagator_unitary(c1, c2, delta, phi):
    U = geometric_phase_propagator(np.array([c1, c2]), delta, phi)
    assert np.max(np.abs(U.conj().T @ U - np.eye(4))) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(1e2, 1e6))
def test_maximally_entangling_at_delta_4_omega(Om):
    U = geometric_phase_propagator(np.array([Om, -Om]), 4 * Om)
    ph = np.angle(np.diag(U))
    assert (ph[1] - ph[0]) % (2 * math.pi) == pytest.approx(math.pi / 2, abs=1e-10)
    assert ph[0] == pytest.approx(ph[3], abs=1e-12)


def test_zz_gate_report(zz_setup):
    rep = zz_setup.report()
    tau = zz_setup.spec.tau
    assert tau == pytest.approx(20e-6, rel=1e-12)
    assert abs(rep.couplings[0]) == pytest.approx(zz_setup.spec.delta / 4, rel=1e-12)
    assert gate_time_for_current(zz_setup.current, zz_setup.design.gradient_field(1.0), zz_setup.modes,
                                 zz_setup.mode_index, zz_setup.pair, "zz") == pytest.approx(tau, rel=1e-12)
    for traj in rep.trajectories.values():
        assert abs(traj[-1]) <= 1e-10 * max(1e-300, np.max(np.abs(traj)))


def test_phiphi_rejects_unequal_amplitudes(phiphi_setup):
    s = phiphi_setup
    with pytest.raises(UnsupportedConfigurationError):
        sigma_phiphi_gate(s.rabi, s.mode_index, s.spec.delta, 0.0, 0.0, amplitudes=(1.0, 0.9))


def test_phiphi_tones_and_phase(phiphi_setup):
    s = phiphi_setup
    blue, red = s.spec.tones()
    w0, wj, d = s.pair.omega0, s.spec.mode_frequency, s.spec.delta
    assert blue.omega == pytest.approx(w0 + wj - d) and red.omega == pytest.approx(w0 - wj + d)


def test_ac_zeeman_two_level_terms(phiphi_setup):
    # contribution of the partner level equals the textbook RWA + counter-rotating shift
    pair = phiphi_setup.pair
    B = np.array([1e-5, 0.0, 0.0])
    w = pair.omega0 - 2 * math.pi * 3e6
    shifts = ac_zeeman_shifts(pair, B, w)
    labels = [lv.label for lv in breit_rabi_levels(pair.species, pair.B0)]
    k = labels.index(pair.down.label)
    Om = B[0] * pair.mu_x_updown / (2 * CONSTANTS.hbar)
    expected = Om**2 / (pair.omega0 - w) + Om**2 / (pair.omega0 + w)
    assert shifts[0, k] == pytest.approx(expected, rel=1e-9)
    assert shifts[1, labels.index(pair.up.label)] == pytest.approx(-expected, rel=1e-9)


def test_budget_structure(zz_setup, phiphi_setup):
    disp = (0.0, 0.0, 200e-9)
    bz = zz_setup.report(displacement=disp).budget
    tot = bz.mechanism_totals()
    # zz pair: Delta mF = 2, no carrier coupling
    assert tot["carrier_rwa"] == 0.0 and tot["carrier_counter_rotating"] == 0.0
    bp = phiphi_setup.report(displacement=disp).budget
    lines = {(ln.mechanism, ln.tone): ln.phase for ln in bp.lines}
    # blue and red detunings are opposite: their RWA shifts cancel
    assert lines[("carrier_rwa", "blue")] == pytest.approx(-lines[("carrier_rwa", "red")], rel=1e-9)
    assert bp.max_phase == pytest.approx(abs(bp.total_phase))


def test_electric_equivalence_and_anharmonic(zz_setup):
    assert anharmonic_suppression(10.6e-9, 30e-6) == pytest.approx(1.248e-7, rel=1e-3)
    with pytest.raises(ValueError):
        anharmonic_suppression(0.0, 30e-6)
    v = electric_equivalence_potential(1e3, CONSTANTS.muB, 1e4)
    assert v == pytest.approx(CONSTANTS.muB * 1e3 / (CONSTANTS.elementary_charge * 1e4))
    b = zz_setup.report(displacement=(0, 0, 0)).budget
    assert 1.15e-6 < b.electric_equivalence < 4.6e-6
