import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from maggates.constants import CONSTANTS
from maggates.fields import (
    Conductor,
    CurrentAssignment,
    DriveTone,
    NullSolveError,
    SingularityError,
    field_map,
    field_of_layout,
    field_of_strip,
    field_of_wire,
    numerical_jacobian,
    pickup_field,
    solve_null_currents,
)

MU = CONSTANTS.mu0 / (2 * math.pi)


def test_wire_biot_savart():
    w = Conductor.wire("w")
    s = field_of_wire(w, 2.0, (3e-6, 0, 4e-6))
    assert np.linalg.norm(s.B) == pytest.approx(MU * 2.0 / 5e-6, rel=1e-14)
    # field is perpendicular to the radius
    assert s.B[0] * 3e-6 + s.B[2] * 4e-6 == pytest.approx(0, abs=1e-20)
    with pytest.raises(SingularityError):
        field_of_wire(w, 1.0, (0, 0, 0))


def _strip_quadrature(z1, z2, I, x, z):
    k = MU * I / (z2 - z1)
    tol = dict(epsabs=1e-13 * MU * abs(I) / abs(x), epsrel=1e-12, limit=200)
    bx = quad(lambda s: k * (z - s) / (x**2 + (z - s) ** 2), z1, z2, **tol)[0]
    bz = quad(lambda s: -k * x / (x**2 + (z - s) ** 2), z1, z2, **tol)[0]
    return np.array([bx, 0.0, bz])


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-6, 1e-4), st.floats(-1e-4, 1e-4), st.floats(1e-6, 5e-5), st.floats(-1e-4, 1e-4))
def test_strip_matches_quadrature(x, z, width, z1):
    strip = Conductor.strip("s", z1, z1 + width)
    s = field_of_strip(strip, 1.3, (x, 0, z))
    ref = _strip_quadrature(z1, z1 + width, 1.3, x, z)
    assert np.allclose(s.B, ref, rtol=1e-9, atol=1e-12 * np.linalg.norm(ref))


def test_strip_narrow_limit_is_wire():
    s = field_of_strip(Conductor.strip("s", -1e-12, 1e-12), 1.0, (20e-6, 0, 7e-6))
    w = field_of_wire(Conductor.wire("w"), 1.0, (20e-6, 0, 7e-6))
    assert np.allclose(s.B, w.B, rtol=1e-9)


def test_strip_mirror_symmetry():
    strip = Conductor.strip("s", -5e-6, 8e-6)
    a = field_of_strip(strip, 1.0, (10e-6, 0, 3e-6)).B
    b = field_of_strip(strip, 1.0, (-10e-6, 0, 3e-6)).B
    # Bx is even in x, Bz odd (mirror image of the sheet current)
    assert b[0] == pytest.approx(a[0]) and b[2] == pytest.approx(-a[2])


@settings(max_examples=30, deadline=None)
@given(st.floats(5e-6, 8e-5), st.floats(-8e-5, 8e-5))
def test_jacobian_analytic_vs_numeric_and_invariants(x, z):
    conds = [Conductor.strip("a", -2e-5, 2e-5), Conductor.strip("c", 4e-5, 9e-5), Conductor.wire("w", x=-1e-5, z=3e-5)]
    cur = {"a": 1.0, "c": -2.5, "w": 0.7}
    s = field_of_layout(conds, cur, (x, 0, z))
    J = s.jacobian
    scale = np.max(np.abs(J))
    assert np.max(np.abs(J - J.T)) <= 1e-12 * scale
    assert abs(np.trace(J)) <= 1e-12 * scale
    num = numerical_jacobian(lambda p: field_of_layout(conds, cur, p).B, (x, 0, z), h=1e-8)
    assert np.allclose(num[:, [0, 2]], J[:, [0, 2]], rtol=1e-6, atol=1e-6 * scale)


def test_superposition_linearity():
    conds = [Conductor.strip("a", -1e-5, 1e-5), Conductor.wire("b", z=3e-5)]
    p = (2e-5, 0, 1e-5)
    s1 = field_of_layout(conds, {"a": 1.0, "b": 0.0}, p)
    s2 = field_of_layout(conds, {"a": 0.0, "b": 1.0}, p)
    s = field_of_layout(conds, [2.0, -3.0], p)
    assert np.allclose(s.B, 2 * s1.B - 3 * s2.B)
    assert np.allclose((2 * s1 + s2 * -3).jacobian, s.jacobian)


def test_field_map_matches_pointwise():
    conds = [Conductor.strip("a", -1e-5, 1e-5), Conductor.wire("b", x=-5e-6, z=2e-5)]
    cur = CurrentAssignment({"a": 1.0, "b": 0.4})
    xs, zs = np.linspace(5e-6, 4e-5, 5), np.linspace(-3e-5, 3e-5, 7)
    m = field_map(conds, cur, xs, zs)
    for i, x in enumerate(xs):
        for k, z in enumerate(zs):
            s = field_of_layout(conds, cur, (x, 0, z))
            assert m["Bx"][i, k] == pytest.approx(s.Bx, rel=1e-12, abs=1e-18)
            assert m["Bz"][i, k] == pytest.approx(s.Bz, rel=1e-12, abs=1e-18)
            assert m["dBx_dz"][i, k] == pytest.approx(s.gradient("x", "z"), rel=1e-10, abs=1e-12)


def test_null_solver():
    conds = [Conductor.strip("a", -1e-5, 1e-5), Conductor.strip("c", 2e-5, 5e-5), Conductor.strip("d", -5e-5, -2e-5)]
    sol = solve_null_currents(conds, {"a": 1.0}, (3e-5, 0, 0))
    assert sol.residual <= 1e-12 * sol.reference
    # symmetric layout: symmetric currents
    assert sol.currents["c"] == pytest.approx(sol.currents["d"], rel=1e-9)
    with pytest.raises(NullSolveError):
        solve_null_currents(conds[:2], {"a": 1.0}, (3e-5, 0, 0))
    with pytest.raises(NullSolveError):
        solve_null_currents(conds, {"a": 0.0}, (3e-5, 0, 0))


def test_drive_tone_phase_normalised():
    assert DriveTone(1.0, 3 * math.pi).phase == pytest.approx(math.pi)
    assert DriveTone(1.0, -math.pi / 2 - 2 * math.pi).phase == pytest.approx(-math.pi / 2)


def test_five_wire_design(design):
    d0 = design.d0
    # independent recomputation through the quadrature oracle
    bx = sum(_strip_quadrature(c.z1, c.z2, design.rotation_currents.amps.get(c.name, 0.0), d0, 0.0)[0]
             for c in design.conductors if c.name in design.rotation_currents.amps)
    assert abs(bx) * d0 == pytest.approx(1.5e-7, rel=0.05)
    g = design.gradient_field(1.0)
    h = 1e-9
    num = (sum(_strip_quadrature(c.z1, c.z2, design.gradient_currents[c.name], d0 + h, 0.0)[2]
               - _strip_quadrature(c.z1, c.z2, design.gradient_currents[c.name], d0 - h, 0.0)[2]
               for c in design.conductors) / (2 * h))
    assert abs(num) * d0**2 == pytest.approx(2.5e-7, rel=0.05)
    assert np.linalg.norm(g.B) / (MU * 1.0 / d0) < 1e-6
    assert design.side_ratio == pytest.approx(-2.5, rel=1e-6)
    # the gradient drive is a pure quadrupole at the ion: dBz/dx = dBx/dz, no dBx/dx
    assert abs(g.gradient("x", "x")) < 1e-9 * abs(g.gradient("z", "x"))


def test_pickup_boundary_integral():
    strip = Conductor.strip("a", -1e-5, 1.5e-5)
    x, z, V = 3e-5, 4e-6, 1.0

    def phi(x, z):
        # Poisson kernel of the half plane: phi = (V / pi) * int x / (x^2 + (z - s)^2) ds over the strip
        return V / math.pi * quad(lambda s: x / (x * x + (z - s) ** 2), strip.z1, strip.z2, epsrel=1e-13)[0]

    h = 1e-9
    Ex = -(phi(x + h, z) - phi(x - h, z)) / (2 * h)
    Ez = -(phi(x, z + h) - phi(x, z - h)) / (2 * h)
    E = pickup_field(strip, V, (x, 0, z))
    assert E[0] == pytest.approx(Ex, rel=1e-6)
    assert E[2] == pytest.approx(Ez, rel=1e-6)
    with pytest.raises(SingularityError):
        pickup_field(strip, V, (0, 0, 0))
