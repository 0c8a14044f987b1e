"""Quasi-static fields of y-aligned surface conductors.

Axes: the trap electrodes lie in the yz plane (x = 0), currents run along
+/- y and the ion sits above the plane at x = d0.  Conductors are infinite
along y, so all fields are independent of y and B_y = 0.  Oscillating
currents I cos(wt + phi) are treated as dc fields times the same carrier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import least_squares

from . import _kernels
from .constants import CONSTANTS

MIN_DISTANCE = 1e-9  # m

# coefficients quoted for the five-wire layout: B_x per amp of the side pair
# times d0, and gradient per amp of the centre conductor times d0**2
FIVE_WIRE_BX_COEFF = 1.5e-7  # T m / A
FIVE_WIRE_GRAD_COEFF = 2.5e-7  # T m / A
FIVE_WIRE_RATIO = -2.5


class SingularityError(ValueError):
    """Field evaluated on or too close to a conductor."""


class NullSolveError(RuntimeError):
    pass


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class Conductor:
    """A y-aligned conductor.

    ``kind == "wire"``: thin wire through (``x``, ``z``).
    ``kind == "strip"``: uniform ribbon over [``z1``, ``z2``] in the plane at ``x``.
    ``direction`` is +1 for current along +y.
    """

    name: str
    kind: str
    z1: float = 0.0
    z2: float = 0.0
    x: float = 0.0
    direction: int = 1

    def __post_init__(self):
        if self.kind not in ("wire", "strip"):
            raise ValueError(f"conductor kind must be 'wire' or 'strip', got {self.kind!r}")
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        if self.kind == "strip" and not self.z2 > self.z1:
            raise ValueError(f"strip {self.name!r} needs z2 > z1")
        if self.kind == "wire" and self.z1 != self.z2:
            raise ValueError(f"wire {self.name!r} has a single z position")

    @classmethod
    def wire(cls, name, x=0.0, z=0.0, direction=1):
        return cls(name=name, kind="wire", z1=z, z2=z, x=x, direction=direction)

    @classmethod
    def strip(cls, name, z1, z2, x=0.0, direction=1):
        return cls(name=name, kind="strip", z1=z1, z2=z2, x=x, direction=direction)

    @property
    def width(self) -> float:
        return self.z2 - self.z1

    @property
    def center(self) -> float:
        return 0.5 * (self.z1 + self.z2)


@dataclass(frozen=True)
class DriveTone:
    omega: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.omega >= 0:
            raise ValueError(f"tone frequency must be non-negative, got {self.omega}")
        # normalise into (-pi, pi]
        p = math.remainder(self.phase, 2 * math.pi)
        if p == -math.pi:
            p = math.pi
        object.__setattr__(self, "phase", p)


@dataclass(frozen=True)
class CurrentAssignment:
    """Signed current amplitudes (A) keyed by conductor name."""

    amps: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        amps = {k: float(v) for k, v in dict(self.amps).items()}
        if not all(math.isfinite(v) for v in amps.values()):
            raise ValueError("currents must be finite")
        if not any(v != 0 for v in amps.values()):
            raise ValueError("at least one current must be nonzero")
        object.__setattr__(self, "amps", amps)

    def __getitem__(self, name):
        return self.amps.get(name, 0.0)

    def scaled(self, s: float) -> "CurrentAssignment":
        return CurrentAssignment({k: s * v for k, v in self.amps.items()})

    def vector(self, conductors: Sequence[Conductor]) -> np.ndarray:
        names = {c.name for c in conductors}
        extra = set(self.amps) - names
        if extra:
            raise KeyError(f"currents given for unknown conductors {sorted(extra)}")
        return np.array([self[c.name] for c in conductors])


@dataclass(frozen=True)
class FieldSample:
    """Field (T) and Jacobian dB_i/dx_j (T/m) at one point, axes ordered (x, y, z)."""

    B: np.ndarray
    jacobian: np.ndarray

    def __add__(self, other):
        return FieldSample(self.B + other.B, self.jacobian + other.jacobian)

    def __mul__(self, s):
        return FieldSample(s * self.B, s * self.jacobian)

    __rmul__ = __mul__

    @property
    def Bx(self):
        return self.B[0]

    @property
    def Bz(self):
        return self.B[2]

    def gradient(self, component: str, along: str) -> float:
        ax = {"x": 0, "y": 1, "z": 2}
        return float(self.jacobian[ax[component], ax[along]])


def _as_point(point) -> tuple[float, float]:
    p = np.asarray(point, dtype=float)
    if p.shape == (3,):
        return float(p[0]), float(p[2])
    if p.shape == (2,):
        return float(p[0]), float(p[1])
    raise ValueError("point must be (x, y, z) or (x, z)")


def _sample(Bx, Bz, dBx_dx, dBx_dz):
    B = np.array([Bx, 0.0, Bz])
    jac = np.array([
        [dBx_dx, 0.0, dBx_dz],
        [0.0, 0.0, 0.0],
        [dBx_dz, 0.0, -dBx_dx],
    ])
    return FieldSample(B, jac)


def field_of_wire(wire: Conductor, I: float, point) -> FieldSample:
    """Biot-Savart field of an infinite thin wire: |B| = mu0 I / (2 pi d)."""
    if wire.kind != "wire":
        raise ValueError("field_of_wire needs a wire conductor")
    x, z = _as_point(point)
    dx, dz = x - wire.x, z - wire.z1
    r2 = dx * dx + dz * dz
    if r2 < MIN_DISTANCE**2:
        raise SingularityError(f"point within {MIN_DISTANCE} m of wire {wire.name!r}")
    k = CONSTANTS.mu0 * I * wire.direction / (2 * math.pi)
    return _sample(k * dz / r2, -k * dx / r2, -2 * k * dx * dz / r2**2, k * (dx * dx - dz * dz) / r2**2)


def field_of_strip(strip: Conductor, I: float, point) -> FieldSample:
    """Field of a uniform surface-current ribbon (closed-form log/arctan)."""
    if strip.kind != "strip":
        raise ValueError("field_of_strip needs a strip conductor")
    x, z = _as_point(point)
    dx = x - strip.x
    if abs(dx) < MIN_DISTANCE and strip.z1 - MIN_DISTANCE <= z <= strip.z2 + MIN_DISTANCE:
        raise SingularityError(f"point on or inside strip {strip.name!r}")
    kw = CONSTANTS.mu0 * I * strip.direction / (2 * math.pi * strip.width)
    u1, u2 = z - strip.z1, z - strip.z2
    r1, r2 = u1 * u1 + dx * dx, u2 * u2 + dx * dx
    theta = math.atan2(dx * strip.width, dx * dx + u1 * u2)
    return _sample(
        0.5 * kw * math.log(r1 / r2),
        -kw * theta,
        kw * (dx / r1 - dx / r2),
        kw * (u1 / r1 - u2 / r2),
    )


def field_of_conductor(conductor: Conductor, I: float, point) -> FieldSample:
    if conductor.kind == "wire":
        return field_of_wire(conductor, I, point)
    return field_of_strip(conductor, I, point)


def _current_vector(conductors, currents) -> np.ndarray:
    if isinstance(currents, CurrentAssignment):
        return currents.vector(conductors)
    if isinstance(currents, Mapping):
        return CurrentAssignment(currents).vector(conductors)
    vec = np.asarray(currents, dtype=float)
    if vec.shape != (len(conductors),):
        raise ValueError(f"expected {len(conductors)} currents, got shape {vec.shape}")
    return vec


def field_of_layout(conductors: Sequence[Conductor], currents, point) -> FieldSample:
    """Superposition over conductors; ``currents`` is a CurrentAssignment, mapping or sequence."""
    amps = _current_vector(conductors, currents)
    total = _sample(0.0, 0.0, 0.0, 0.0)
    for c, I in zip(conductors, amps):
        if I != 0.0:
            total = total + field_of_conductor(c, I, point)
    return total


def numerical_jacobian(func, point, h: float = 1e-9) -> np.ndarray:
    """Five-point central differences of ``func(point) -> B`` with one Richardson step."""
    p = np.array(point, dtype=float)

    def d(step, j):
        e = np.zeros(3)
        e[j] = step
        f = lambda q: np.asarray(func(q))
        return (-f(p + 2 * e) + 8 * f(p + e) - 8 * f(p - e) + f(p - 2 * e)) / (12 * step)

    jac = np.zeros((3, 3))
    for j in (0, 2):
        coarse, fine = d(2 * h, j), d(h, j)
        jac[:, j] = fine + (fine - coarse) / 15.0
    return jac


def field_map(conductors: Sequence[Conductor], currents, xs, zs):
    """Field on an (x, z) grid.  Returns a dict of 2D arrays (rows follow ``xs``)."""
    amps = _current_vector(conductors, currents)
    X, Z = np.meshgrid(np.asarray(xs, float), np.asarray(zs, float), indexing="ij")
    x0 = np.array([c.x for c in conductors])
    z1 = np.array([c.z1 for c in conductors])
    z2 = np.array([c.z2 for c in conductors])
    k = CONSTANTS.mu0 * amps * np.array([c.direction for c in conductors]) / (2 * math.pi)
    Bx, Bz, dBx_dx, dBx_dz = _kernels.strip_field_grid(x0, z1, z2, k, X, Z)
    return {"x": X, "z": Z, "Bx": Bx, "Bz": Bz, "dBx_dx": dBx_dx, "dBx_dz": dBx_dz, "dBz_dx": dBx_dz}


# ---------------------------------------------------------------------------
# field nulling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NullSolution:
    currents: CurrentAssignment
    field: FieldSample
    residual: float  # |B| at the point after substitution (T)
    reference: float  # largest single-conductor |B| (T)


def solve_null_currents(conductors: Sequence[Conductor], fixed: Mapping[str, float], point) -> NullSolution:
    """Choose the free conductor currents so that B vanishes at ``point``.

    Linear least squares on (B_x, B_z); the residual is checked by
    re-evaluating :func:`field_of_layout` with the returned currents.
    """
    names = [c.name for c in conductors]
    unknown = set(fixed) - set(names)
    if unknown:
        raise KeyError(f"fixed currents for unknown conductors {sorted(unknown)}")
    if not any(v != 0 for v in fixed.values()):
        raise NullSolveError("need at least one nonzero fixed current")
    free = [c for c in conductors if c.name not in fixed]
    if len(free) < 2:
        raise NullSolveError(f"need at least 2 free conductors to null Bx and Bz, have {len(free)}")

    A = np.array([[field_of_conductor(c, 1.0, point).B[i] for c in free] for i in (0, 2)])
    b = -field_of_layout(conductors, {k: v for k, v in fixed.items()}, point).B[[0, 2]]
    scale = np.max(np.abs(A))
    if scale == 0 or np.linalg.matrix_rank(A / scale, tol=1e-10) < 2:
        raise NullSolveError("free conductors cannot produce independent Bx and Bz at the point (rank < 2)")
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)

    amps = dict(fixed)
    amps.update({c.name: float(v) for c, v in zip(free, sol)})
    currents = CurrentAssignment(amps)
    sample = field_of_layout(conductors, currents, point)
    reference = max(np.linalg.norm(field_of_conductor(c, currents[c.name], point).B) for c in conductors)
    residual = float(np.linalg.norm(sample.B))
    if residual > 1e-9 * reference:
        raise NullSolveError(f"null not reached: |B| = {residual:.3e} T vs reference {reference:.3e} T")
    return NullSolution(currents=currents, field=sample, residual=residual, reference=reference)


# ---------------------------------------------------------------------------
# five-wire layout
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiveWireDesign:
    """Fitted five-wire geometry.

    Conductors: ``a`` (centre control electrode), ``c`` and ``d`` (outer
    control electrodes at +z and -z).  The rf rails (b) occupy the gaps
    between ``a`` and ``c``/``d`` and carry no gate current.
    """

    d0: float
    conductors: tuple[Conductor, ...]
    rotation_currents: CurrentAssignment  # antiparallel unit currents in c, d
    gradient_currents: CurrentAssignment  # unit current in a, nulling currents in c, d
    side_ratio: float
    bx_per_amp: float  # T/A at the ion for rotation_currents
    gradient_per_amp: float  # dBz/dx = dBx/dz (T/m per A of centre current)
    null_relative: float
    fit_residuals: np.ndarray
    notes: tuple[str, ...] = ()

    @property
    def ion(self) -> np.ndarray:
        return np.array([self.d0, 0.0, 0.0])

    def conductor(self, name: str) -> Conductor:
        for c in self.conductors:
            if c.name == name:
                return c
        raise KeyError(name)

    def gradient_field(self, current: float = 1.0, point=None) -> FieldSample:
        p = self.ion if point is None else point
        return field_of_layout(self.conductors, self.gradient_currents.scaled(current), p)

    def rotation_field(self, current: float = 1.0, point=None) -> FieldSample:
        p = self.ion if point is None else point
        return field_of_layout(self.conductors, self.rotation_currents.scaled(current), p)


def _five_wire_conductors(d0, half_a, c1, w):
    half_a, c1, w = float(half_a), float(c1), float(w)
    return (
        Conductor.strip("a", -half_a * d0, half_a * d0),
        Conductor.strip("c", c1 * d0, (c1 + w) * d0),
        Conductor.strip("d", -(c1 + w) * d0, -c1 * d0),
    )


def design_five_wire(
    d0: float,
    bx_coeff: float = FIVE_WIRE_BX_COEFF,
    grad_coeff: float = FIVE_WIRE_GRAD_COEFF,
    ratio: float = FIVE_WIRE_RATIO,
    min_rail: float = 0.1,
    tol: float = 0.05,
) -> FiveWireDesign:
    """Fit electrode positions so the layout reproduces the target coefficients.

    Free parameters (in units of d0): half-width of ``a``, the gap left for
    the rf rail between ``a`` and ``c``/``d`` (at least ``min_rail``), and
    the width of ``c``/``d``.  The side/centre current ratio is held at
    ``ratio`` and then refined by :func:`solve_null_currents`.
    """
    if not d0 > 0:
        raise ValueError("d0 must be positive")
    mu = CONSTANTS.mu0 / (2 * math.pi)
    target_bx = bx_coeff / (mu * 1.0)  # dimensionless, in units of mu0/(2 pi d0)
    target_g = grad_coeff / mu

    def residuals(p):
        half_a, gap, w = p
        c1 = half_a + gap
        c2 = c1 + w
        fx = math.log((1 + c2**2) / (1 + c1**2)) / w
        side = (math.atan(c2) - math.atan(c1)) / w
        null = math.atan(half_a) / half_a + 2 * ratio * side
        grad = 1 / (1 + half_a**2) - 2 * ratio / w * (c1 / (1 + c1**2) - c2 / (1 + c2**2))
        return [fx / target_bx - 1, null, grad / target_g - 1]

    fit = least_squares(
        residuals, x0=[0.6, 0.8, 1.5], bounds=([0.05, min_rail, 0.05], [5.0, 10.0, 20.0]),
        xtol=1e-15, ftol=1e-15, gtol=1e-15,
    )
    half_a, gap, w = fit.x
    conductors = _five_wire_conductors(d0, half_a, half_a + gap, w)
    ion = np.array([d0, 0.0, 0.0])

    null = solve_null_currents(conductors, {"a": 1.0}, ion)
    side_ratio = 0.5 * (null.currents["c"] + null.currents["d"])
    rotation = CurrentAssignment({"c": 1.0, "d": -1.0})
    bx = field_of_layout(conductors, rotation, ion).Bx
    grad = null.field.gradient("z", "x")
    res = np.array([abs(bx) * d0 / bx_coeff - 1, grad * d0**2 / grad_coeff - 1])
    null_rel = null.residual / null.reference
    if not fit.success or np.any(np.abs(res) > tol) or null_rel > 1e-6:
        raise FitError(
            f"five-wire fit failed: coefficient residuals {res}, null {null_rel:.2e}, optimizer: {fit.message}"
        )
    notes = (
        "electrode widths and gaps are not fixed by the target coefficients alone; "
        f"this solution holds the side/centre ratio at {ratio} and keeps a rail gap >= {min_rail} d0",
        f"fitted (units of d0): centre half-width {half_a:.4f}, side electrodes {half_a + gap:.4f}..{half_a + gap + w:.4f}",
    )
    return FiveWireDesign(
        d0=d0,
        conductors=conductors,
        rotation_currents=rotation,
        gradient_currents=null.currents,
        side_ratio=side_ratio,
        bx_per_amp=abs(bx),
        gradient_per_amp=grad,
        null_relative=null_rel,
        fit_residuals=np.asarray(fit.fun),
        notes=notes,
    )


# ---------------------------------------------------------------------------
# electrostatic pickup
# ---------------------------------------------------------------------------

def pickup_field(strip: Conductor, volts: float, point) -> np.ndarray:
    """Electric field (V/m) of a strip held at ``volts`` in an otherwise grounded plane.

    Gapless-plane solution: phi = (V / pi) * (angle subtended by the strip).
    """
    if strip.kind != "strip":
        raise ValueError("pickup_field needs a strip")
    x, z = _as_point(point)
    dx = x - strip.x
    if abs(dx) < MIN_DISTANCE:
        raise SingularityError("pickup field is singular in the electrode plane")
    u1, u2 = z - strip.z1, z - strip.z2
    r1, r2 = u1 * u1 + dx * dx, u2 * u2 + dx * dx
    dtheta_dx = u2 / r2 - u1 / r1
    dtheta_dz = dx / r1 - dx / r2
    s = -volts / math.pi
    return np.array([s * dtheta_dx, 0.0, s * dtheta_dz])
