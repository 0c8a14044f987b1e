import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maggates.atomic import (
    NoStationaryPointError,
    angular_momentum_ops,
    breit_rabi_formula,
    breit_rabi_levels,
    dipole_matrix_element,
    field_independent_point,
    find_level,
    hyperfine_hamiltonian,
    interval_rule_energy,
    make_qubit_pair,
    moment_z,
    transition_frequency,
)
from maggates.constants import CONSTANTS, SPECIES, get_species, load_registry


def test_registry_entries_and_validation(tmp_path):
    assert {"9Be+", "25Mg+", "43Ca+"} <= set(SPECIES)
    be = SPECIES["9Be+"]
    assert be.nuclear_spin == 1.5 and be.hyperfine_constant < 0
    bad = tmp_path / "bad.toml"
    bad.write_text('["X+"]\nmass_u = 1.0\nnuclear_spin = 0.5\nhyperfine_A_Hz = 1.0\ngJ = 2.0\n')
    with pytest.raises(ValueError, match="missing"):
        load_registry(bad)
    with pytest.raises(KeyError):
        get_species("Xx+")
    assert get_species("9Be+", gI=0.0).gI == 0.0


def test_angular_momentum_commutators():
    ops = angular_momentum_ops(1.5)
    for a, b, c in (("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y")):
        for S in ("J", "I"):
            comm = ops[S + a] @ ops[S + b] - ops[S + b] @ ops[S + a]
            assert np.allclose(comm, 1j * ops[S + c], atol=1e-14)
    I2 = sum(ops["I" + k] @ ops["I" + k] for k in "xyz")
    assert np.allclose(I2, 1.5 * 2.5 * np.eye(8))


def test_zero_field_interval_rule(be):
    E = {lv.label: lv.energy for lv in breit_rabi_levels(be, 0.0)}
    for (F, mF), e in E.items():
        assert e == pytest.approx(interval_rule_energy(be, F), abs=1e-3)
    # A < 0: F = 2 lies below F = 1 by 2|A|
    assert E[(1.0, 0.0)] - E[(2.0, 0.0)] == pytest.approx(2 * abs(be.hyperfine_constant), rel=1e-12)


@pytest.mark.parametrize("name", ["9Be+", "25Mg+", "43Ca+"])
@pytest.mark.parametrize("B", [1e-4, 3e-3, 11.9e-3, 30e-3])
def test_numeric_levels_match_closed_form(name, B):
    sp = get_species(name)
    for lv in breit_rabi_levels(sp, B):
        ref = breit_rabi_formula(sp, lv.F, lv.mF, B)
        assert lv.energy == pytest.approx(ref, abs=1e-6 * abs(sp.hyperfine_constant))


def test_eigenvectors_diagonalise_hamiltonian(be):
    B = 11.9e-3
    H = hyperfine_hamiltonian(be, B)
    for lv in breit_rabi_levels(be, B):
        assert np.allclose(H @ lv.eigenvector, lv.energy * lv.eigenvector, atol=1e-3)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-4, 0.05))
def test_hellmann_feynman_moment(B):
    be = get_species("9Be+")
    h = 1e-7
    for label in ((2.0, 2.0), (2.0, 0.0), (1.0, 1.0)):
        dE = (breit_rabi_formula(be, *label, B + h) - breit_rabi_formula(be, *label, B - h)) / (2 * h)
        assert moment_z(be, label, B) == pytest.approx(-CONSTANTS.h * dE, rel=1e-6, abs=1e-6 * CONSTANTS.muB)


def test_clock_pair_matrix_element_low_field(be):
    # Clebsch-Gordan limit: |<1,1|mu_x|2,0>| = gJ muB / (4 sqrt 2) (nuclear term is 1e-4 smaller)
    m = abs(dipole_matrix_element(be, (1, 1), (2, 0), "x", 1e-6))
    assert m == pytest.approx(be.gJ * CONSTANTS.muB / (4 * math.sqrt(2)), rel=2e-3)


def _omega_closed_form(be, B):
    return 2 * math.pi * (breit_rabi_formula(be, 1, 1, B) - breit_rabi_formula(be, 2, 0, B))


def test_clock_point_against_finite_difference_bisection(be):
    # oracle: bisection on a central difference of the closed-form transition frequency
    def slope(B, h=1e-8):
        return (_omega_closed_form(be, B + h) - _omega_closed_form(be, B - h)) / (2 * h)

    lo, hi = 5e-3, 20e-3
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if slope(lo) * slope(mid) <= 0:
            hi = mid
        else:
            lo = mid
    sp = field_independent_point(be, ((1, 1), (2, 0)))
    assert sp.B == pytest.approx(0.5 * (lo + hi), abs=1e-8)
    assert abs(sp.slope) < 2 * math.pi * 1e-3 * 1e3  # far below 1 Hz/mT
    assert sp.omega0 == pytest.approx(_omega_closed_form(be, sp.B), rel=1e-12)


def test_no_stationary_point_for_stretched_pair(be):
    with pytest.raises(NoStationaryPointError):
        field_independent_point(be, ((2, 2), (1, 1)))


def test_transition_sign_and_pair_validation(be):
    B = 11.9e-3
    assert transition_frequency(be, (1, 1), (2, 0), B) > 0
    with pytest.raises(ValueError):
        make_qubit_pair(be, (2, 0), (1, 1), B)
    with pytest.raises(KeyError):
        find_level(be, (3, 0), B)
    with pytest.raises(ValueError):
        breit_rabi_levels(be, -1.0)


def test_zz_pair_moments(be):
    p = make_qubit_pair(be, (2, 2), (2, 0), 11.9446e-3)
    assert p.mu_x_updown == pytest.approx(0.0, abs=1e-30)  # Delta mF = 2
    assert p.mu_z_up / CONSTANTS.muB == pytest.approx(-(be.gJ / 2 + 1.5 * be.gI), rel=1e-12)
    assert p.mu_eff == pytest.approx(0.5 * (p.mu_z_up - p.mu_z_down))
