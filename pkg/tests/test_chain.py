import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maggates.chain import (
    ChainConfig,
    ChainInstabilityError,
    dimensionless_positions,
    equilibrium_positions,
    gate_mode,
    ground_state_extent,
    normal_modes,
    two_ion_gate_chain,
)
from maggates.constants import CONSTANTS

W = 2 * math.pi * 1e6


def test_two_and_three_ion_positions(be):
    assert dimensionless_positions(2) == pytest.approx([-(0.25 ** (1 / 3)), 0.25 ** (1 / 3)], rel=1e-13)
    assert dimensionless_positions(3) == pytest.approx([-(1.25 ** (1 / 3)), 0.0, 1.25 ** (1 / 3)], rel=1e-13, abs=1e-15)
    cfg = ChainConfig(2, be.mass, W, 5 * W, 5 * W)
    sep = np.diff(equilibrium_positions(cfg))[0]
    e, eps0 = CONSTANTS.elementary_charge, CONSTANTS.epsilon0
    assert sep == pytest.approx((e * e / (2 * math.pi * eps0 * be.mass * W**2)) ** (1 / 3), rel=1e-12)


def test_axial_mode_frequencies(be):
    # known eigenvalues of the axial Hessian: 1, 3, 29/5 for N = 3
    m = normal_modes(ChainConfig(3, be.mass, W, 5 * W, 6 * W), "y")
    assert (m.frequencies / W) ** 2 == pytest.approx([1.0, 3.0, 29 / 5], rel=1e-12)


def test_two_ion_transverse_modes(be):
    m = normal_modes(ChainConfig(2, be.mass, W, 5 * W, 6 * W), "x")
    assert m.frequencies[1] == pytest.approx(5 * W, rel=1e-13)  # COM
    assert m.frequencies[0] == pytest.approx(math.sqrt(24) * W, rel=1e-13)  # rocking
    assert m.vectors[0] == pytest.approx([1 / math.sqrt(2), -1 / math.sqrt(2)])


@pytest.mark.parametrize("kind", ["com", "rocking"])
@pytest.mark.parametrize("axis", ["x", "z"])
def test_gate_chain_places_mode(be, kind, axis):
    target = 2 * math.pi * 5e6
    cfg = two_ion_gate_chain(be.mass, target, axis, kind, W)
    modes, j = gate_mode(cfg, axis, kind)
    assert modes.frequencies[j] == pytest.approx(target, rel=1e-12)
    assert modes.q0[j] == pytest.approx(ground_state_extent(be.mass, target))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.floats(4.0, 12.0), st.sampled_from("xyz"))
def test_mode_orthonormality(N, ratio, axis):
    m = 9 * CONSTANTS.atomic_mass
    modes = normal_modes(ChainConfig(N, m, W, ratio * N * W, 1.1 * ratio * N * W), axis)
    b = modes.vectors
    assert np.max(np.abs(b @ b.T - np.eye(N))) <= 1e-12
    assert np.all(np.diff(modes.frequencies) >= 0)


def test_com_mode_is_trap_frequency(be):
    for N in (2, 4, 7):
        m = normal_modes(ChainConfig(N, be.mass, W, 9 * W, 10 * W), "x")
        assert m.frequencies[-1] == pytest.approx(9 * W, rel=1e-12)
        assert np.allclose(np.abs(m.vectors[-1]), 1 / math.sqrt(N))


def test_zigzag_instability(be):
    with pytest.raises(ChainInstabilityError):
        normal_modes(ChainConfig(6, be.mass, W, 1.2 * W, 5 * W), "x")


def test_ground_state_extent_value(be):
    assert ground_state_extent(be.mass, 2 * math.pi * 5e6) == pytest.approx(10.59e-9, rel=1e-3)
    with pytest.raises(ValueError):
        ground_state_extent(be.mass, 0.0)
