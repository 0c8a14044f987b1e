"""Equilibrium positions and normal modes of a linear ion string.

Ions are equal-mass, singly charged, strung along y.  Positions are solved in
the dimensionless length unit ``l = (e^2 / (4 pi eps0 m wy^2))^(1/3)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS


class ChainInstabilityError(ValueError):
    """A transverse mode frequency became imaginary (zigzag transition)."""


class ChainConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChainConfig:
    N: int
    mass: float
    omega_axial: float
    omega_x: float
    omega_z: float

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("need at least one ion")
        for name in ("mass", "omega_axial", "omega_x", "omega_z"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def length_scale(self) -> float:
        e, eps0 = CONSTANTS.elementary_charge, CONSTANTS.epsilon0
        return (e * e / (4 * math.pi * eps0 * self.mass * self.omega_axial**2)) ** (1 / 3)

    def trap_frequency(self, axis: str) -> float:
        return {"x": self.omega_x, "y": self.omega_axial, "z": self.omega_z}[axis]


@dataclass(frozen=True)
class ModeDecomposition:
    """Normal modes along one axis.

    ``vectors[j, n]`` is the participation b_{j,n} of ion n in mode j;
    ``q0[j]`` the ground-state extent sqrt(hbar / (2 m w_j)).
    """

    axis: str
    frequencies: np.ndarray  # rad/s, ascending
    vectors: np.ndarray
    q0: np.ndarray
    positions: np.ndarray  # m
    mass: float

    @property
    def n_modes(self) -> int:
        return self.frequencies.size

    @property
    def n_ions(self) -> int:
        return self.vectors.shape[1]

    def select(self, j: int) -> "ModeDecomposition":
        """A decomposition holding only mode ``j``."""
        return ModeDecomposition(
            axis=self.axis,
            frequencies=self.frequencies[j:j + 1],
            vectors=self.vectors[j:j + 1],
            q0=self.q0[j:j + 1],
            positions=self.positions,
            mass=self.mass,
        )


def ground_state_extent(mass: float, omega_j: float) -> float:
    """sqrt(hbar / (2 m w))."""
    if not (mass > 0 and omega_j > 0):
        raise ValueError("mass and frequency must be positive")
    return math.sqrt(CONSTANTS.hbar / (2 * mass * omega_j))


def _forces(u):
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    return u - np.sum(np.sign(diff) / diff**2, axis=1)


def _axial_hessian(u):
    """Dimensionless axial Hessian (units m wy^2)."""
    diff = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(diff, np.inf)
    inv3 = 1.0 / diff**3
    A = -2 * inv3
    np.fill_diagonal(A, 1 + 2 * inv3.sum(axis=1))
    return A


def dimensionless_positions(N: int, tol: float = 1e-14, max_iter: int = 200) -> np.ndarray:
    """Equilibrium of u_m - sum_n sign(u_m - u_n)/(u_m - u_n)^2 = 0 by damped Newton."""
    if N == 1:
        return np.zeros(1)
    u = np.linspace(-1, 1, N) * (N - 1) ** 0.56 * 0.9
    for _ in range(max_iter):
        f = _forces(u)
        if np.max(np.abs(f)) < tol:
            break
        # the force Jacobian equals the axial Hessian
        step = np.linalg.solve(_axial_hessian(u), f)
        lam = 1.0
        norm0 = np.max(np.abs(f))
        while lam > 1e-6:
            trial = u - lam * step
            if np.all(np.diff(trial) > 0) and np.max(np.abs(_forces(trial))) < norm0:
                break
            lam *= 0.5
        u = trial
    f = _forces(u)
    if np.max(np.abs(f)) > 1e-12:
        raise ChainConvergenceError(f"Newton iteration did not converge, residual {np.max(np.abs(f)):.3e}")
    # symmetrise away rounding asymmetry
    return 0.5 * (u - u[::-1])


def equilibrium_positions(cfg: ChainConfig) -> np.ndarray:
    return dimensionless_positions(cfg.N) * cfg.length_scale


def mode_hessian(cfg: ChainConfig, axis: str) -> np.ndarray:
    """Dimensionless Hessian (units m wy^2) along ``axis``."""
    u = dimensionless_positions(cfg.N)
    A = _axial_hessian(u)
    if axis == "y":
        return A
    if axis not in ("x", "z"):
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    ratio2 = (cfg.trap_frequency(axis) / cfg.omega_axial) ** 2
    return ratio2 * np.eye(cfg.N) - 0.5 * (A - np.eye(cfg.N))


def normal_modes(cfg: ChainConfig, axis: str) -> ModeDecomposition:
    """Diagonalise the Hessian along ``axis``; modes sorted by ascending frequency."""
    K = mode_hessian(cfg, axis)
    evals, evecs = np.linalg.eigh(K)
    if evals[0] <= 0:
        raise ChainInstabilityError(
            f"{axis}-mode 0 has w^2 = {evals[0] * cfg.omega_axial**2:.3e} rad^2/s^2 <= 0: linear chain unstable (zigzag)"
        )
    vectors = evecs.T.copy()
    for b in vectors:
        k = np.flatnonzero(np.abs(b) > 1e-9)[0]
        if b[k] < 0:
            b *= -1
    freqs = cfg.omega_axial * np.sqrt(evals)
    q0 = np.array([ground_state_extent(cfg.mass, w) for w in freqs])
    return ModeDecomposition(
        axis=axis,
        frequencies=freqs,
        vectors=vectors,
        q0=q0,
        positions=equilibrium_positions(cfg),
        mass=cfg.mass,
    )


def two_ion_gate_chain(mass: float, omega_mode: float, axis: str, kind: str, omega_axial: float) -> ChainConfig:
    """Two-ion chain whose transverse ``kind`` mode ('com' or 'rocking') sits at ``omega_mode``."""
    if axis not in ("x", "z"):
        raise ValueError("gate modes are transverse (x or z)")
    if kind == "com":
        omega_t = omega_mode
    elif kind == "rocking":
        omega_t = math.sqrt(omega_mode**2 + omega_axial**2)
    else:
        raise ValueError(f"mode kind must be 'com' or 'rocking', got {kind!r}")
    # the other transverse axis is parked 10 % higher
    other = 1.1 * omega_t
    wx, wz = (omega_t, other) if axis == "x" else (other, omega_t)
    return ChainConfig(N=2, mass=mass, omega_axial=omega_axial, omega_x=wx, omega_z=wz)


def gate_mode(cfg: ChainConfig, axis: str, kind: str) -> tuple[ModeDecomposition, int]:
    """Mode decomposition along ``axis`` and the index of the COM or rocking mode (N = 2)."""
    modes = normal_modes(cfg, axis)
    if cfg.N != 2:
        raise ValueError("COM/rocking identification is defined for two ions")
    target = 1.0 if kind == "com" else -1.0
    for j, b in enumerate(modes.vectors):
        if np.isclose(b[0] * b[1] * 2, target, atol=1e-9):
            return modes, j
    raise ValueError(f"no {kind} mode found")  # pragma: no cover
