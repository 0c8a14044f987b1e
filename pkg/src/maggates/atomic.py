"""Breit-Rabi level structure of J = 1/2 ions.

Basis convention: the uncoupled product basis |mJ, mI> with mJ as the major
index, both in descending order (mJ = +1/2 first, mI = +I first).  Energies are
kept in Hz; conversion to rad/s happens only in :func:`transition_frequency`
and :class:`QubitPair`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .constants import CONSTANTS, IonSpecies

# continuation step used when tracking adiabatic labels from zero field
LABEL_STEP = 1e-4  # T


class LevelTrackingError(RuntimeError):
    """Adiabatic (F, mF) labels could not be followed unambiguously."""


class NoStationaryPointError(ValueError):
    pass


def _spin_ops(j: float):
    m = np.arange(j, -j - 1e-9, -1.0)
    jz = np.diag(m)
    jp = np.zeros((m.size, m.size))
    for k in range(1, m.size):
        jp[k - 1, k] = math.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    return jz, jp


@lru_cache(maxsize=None)
def angular_momentum_ops(nuclear_spin: float) -> dict[str, np.ndarray]:
    """Jx, Jy, Jz, Ix, Iy, Iz on the product space, plus the m_J, m_I, m_F quantum numbers."""
    jz, jp = _spin_ops(0.5)
    iz, ip = _spin_ops(nuclear_spin)
    e_j, e_i = np.eye(2), np.eye(iz.shape[0])
    JZ, JP = np.kron(jz, e_i), np.kron(jp, e_i)
    IZ, IP = np.kron(e_j, iz), np.kron(e_j, ip)
    ops = {
        "Jx": (JP + JP.T) / 2,
        "Jy": (JP - JP.T) / 2j,
        "Jz": JZ,
        "Ix": (IP + IP.T) / 2,
        "Iy": (IP - IP.T) / 2j,
        "Iz": IZ,
        "mJ": np.diag(JZ).copy(),
        "mI": np.diag(IZ).copy(),
    }
    ops["mF"] = ops["mJ"] + ops["mI"]
    ops["IJ"] = JZ @ IZ + 0.5 * (JP @ IP.T + JP.T @ IP)
    for arr in ops.values():
        arr.setflags(write=False)
    return ops


def hyperfine_hamiltonian(species: IonSpecies, B: float) -> np.ndarray:
    """A I.J + (muB B / h)(gJ Jz + gI Iz) in Hz, on the |mJ, mI> basis."""
    if B < 0:
        raise ValueError(f"bias field must be non-negative, got {B}")
    ops = angular_momentum_ops(species.nuclear_spin)
    zeeman = CONSTANTS.muB * B / CONSTANTS.h
    return species.hyperfine_constant * ops["IJ"] + zeeman * (species.gJ * ops["Jz"] + species.gI * ops["Iz"])


def magnetic_moment_operator(species: IonSpecies, axis: str) -> np.ndarray:
    """mu_axis = -muB (gJ J_axis + gI I_axis), in J/T."""
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    ops = angular_momentum_ops(species.nuclear_spin)
    return -CONSTANTS.muB * (species.gJ * ops["J" + axis] + species.gI * ops["I" + axis])


def interval_rule_energy(species: IonSpecies, F: float) -> float:
    """Zero-field energy of manifold F relative to the hyperfine centroid (Hz)."""
    I, J = species.nuclear_spin, species.electron_spin
    return 0.5 * species.hyperfine_constant * (F * (F + 1) - I * (I + 1) - J * (J + 1))


@dataclass(frozen=True)
class ZeemanLevel:
    F: float
    mF: float
    energy: float  # Hz, relative to the hyperfine centroid
    eigenvector: np.ndarray
    B: float

    @property
    def label(self) -> tuple[float, float]:
        return (self.F, self.mF)

    def __repr__(self):
        return f"ZeemanLevel(F={self.F:g}, mF={self.mF:+g}, E={self.energy:.6e} Hz, B={self.B:.6g} T)"


def _block_indices(species: IonSpecies) -> dict[float, np.ndarray]:
    mF = angular_momentum_ops(species.nuclear_spin)["mF"]
    return {m: np.flatnonzero(np.isclose(mF, m)) for m in sorted(set(np.round(mF, 6)))}


def _track_block(species: IonSpecies, idx: np.ndarray, fields: np.ndarray):
    """Follow eigenvectors of one mF block along ``fields`` (starting at 0).

    Returns energies (Hz) and eigenvectors at the final field ordered by the
    zero-field F assignment.
    """
    ops = angular_momentum_ops(species.nuclear_spin)
    sub = np.ix_(idx, idx)
    zeeman = CONSTANTS.muB / CONSTANTS.h * (species.gJ * ops["Jz"] + species.gI * ops["Iz"])[sub]
    h0 = species.hyperfine_constant * ops["IJ"][sub]
    stack = h0[None] + fields[:, None, None] * zeeman[None]
    energies, vectors = np.linalg.eigh(stack)

    # eigenvalues of a single mF block are non-degenerate at B = 0, so F follows from the interval rule
    I = species.nuclear_spin
    candidates = [F for F in (I + 0.5, I - 0.5) if F >= 0]
    F_labels = []
    for e in energies[0]:
        F_labels.append(min(candidates, key=lambda F: abs(interval_rule_energy(species, F) - e)))
    if len(set(F_labels)) != len(F_labels):
        raise LevelTrackingError(f"zero-field F assignment ambiguous in block with energies {energies[0]}")

    order = np.arange(len(F_labels))
    prev = vectors[0]
    for k in range(1, fields.size):
        overlap = np.abs(prev[:, order].conj().T @ vectors[k]) ** 2
        match = np.argmax(overlap, axis=1)
        if len(set(match)) != len(match) or np.min(overlap[np.arange(len(match)), match]) < 0.75:
            raise LevelTrackingError(
                f"ambiguous eigenvector continuation near B = {fields[k]:.6g} T (overlaps {np.round(overlap, 4)})"
            )
        order = match
        prev = vectors[k]
    return F_labels, energies[-1][order], vectors[-1][:, order]


@lru_cache(maxsize=512)
def _levels_cached(species: IonSpecies, B: float) -> tuple[ZeemanLevel, ...]:
    nsteps = max(1, int(math.ceil(B / LABEL_STEP)))
    fields = np.linspace(0.0, B, nsteps + 1)
    dim = species.dim
    levels = []
    for mF, idx in _block_indices(species).items():
        F_labels, energies, vecs = _track_block(species, idx, fields)
        for F, e, v in zip(F_labels, energies, vecs.T):
            full = np.zeros(dim, dtype=complex)
            full[idx] = v
            # fix the global phase: largest component real positive
            k = np.argmax(np.abs(full))
            full *= np.exp(-1j * np.angle(full[k]))
            full.setflags(write=False)
            levels.append(ZeemanLevel(F=F, mF=float(mF), energy=float(e), eigenvector=full, B=B))
    levels.sort(key=lambda lv: (lv.F, lv.mF))
    return tuple(levels)


def breit_rabi_levels(species: IonSpecies, B: float) -> list[ZeemanLevel]:
    """All hyperfine-Zeeman levels at field ``B``, sorted by adiabatic (F, mF).

    Labels are continued from zero field through eigenvector overlaps in steps
    of at most :data:`LABEL_STEP`; an ambiguous continuation raises
    :class:`LevelTrackingError`.
    """
    if B < 0:
        raise ValueError(f"bias field must be non-negative, got {B}")
    return list(_levels_cached(species, float(B)))


def find_level(species: IonSpecies, label, B: float) -> ZeemanLevel:
    if isinstance(label, ZeemanLevel):
        label = label.label
    F, mF = label
    for lv in breit_rabi_levels(species, B):
        if math.isclose(lv.F, F) and math.isclose(lv.mF, mF):
            return lv
    raise KeyError(f"no level with F={F}, mF={mF} for {species.name}")


def breit_rabi_formula(species: IonSpecies, F: float, mF: float, B: float) -> float:
    """Closed-form Breit-Rabi energy (Hz) relative to the centroid.

    Independent of the matrix diagonalisation; used as a cross-check.
    """
    I, A = species.nuclear_spin, species.hyperfine_constant
    dE = A * (I + 0.5)  # E(F=I+1/2) - E(F=I-1/2)
    muB_h = CONSTANTS.muB / CONSTANTS.h
    if math.isclose(abs(mF), I + 0.5):
        s = math.copysign(1.0, mF)
        return A * I / 2 + s * muB_h * B * (species.gJ / 2 + species.gI * I)
    x = (species.gJ - species.gI) * muB_h * B / dE
    # the upper sign belongs to F = I + 1/2 when dE > 0; the square root carries sign(dE)
    sign = 1.0 if math.isclose(F, I + 0.5) else -1.0
    return -dE / (2 * (2 * I + 1)) + species.gI * muB_h * B * mF + sign * (dE / 2) * math.sqrt(
        1 + 4 * mF * x / (2 * I + 1) + x * x
    )


def transition_frequency(species: IonSpecies, up, down, B: float) -> float:
    """Angular transition frequency 2 pi (E_up - E_down) in rad/s."""
    a = find_level(species, up, B)
    b = find_level(species, down, B)
    if a.label == b.label:
        raise ValueError("transition between a level and itself")
    return 2 * math.pi * (a.energy - b.energy)


def dipole_matrix_element(species: IonSpecies, a, b, axis: str, B: float) -> complex:
    """<a| mu_axis |b> in J/T for levels at field ``B``."""
    va = find_level(species, a, B).eigenvector
    vb = find_level(species, b, B).eigenvector
    return complex(va.conj() @ magnetic_moment_operator(species, axis) @ vb)


def moment_z(species: IonSpecies, label, B: float) -> float:
    """Diagonal <mu_z>, equal to -dE/dB by Hellmann-Feynman."""
    return dipole_matrix_element(species, label, label, "z", B).real


def _domega_dB(species, up, down, B):
    # d(omega0)/dB = -(mu_up - mu_down) / hbar
    return -(moment_z(species, up, B) - moment_z(species, down, B)) / CONSTANTS.hbar


@dataclass(frozen=True)
class StationaryPoint:
    B: float
    omega0: float
    slope: float  # rad/s per T at B
    curvature: float  # rad/s per T^2


def field_independent_point(species: IonSpecies, pair, bracket=(5e-3, 20e-3)) -> StationaryPoint:
    """Bias field where the transition frequency of ``pair`` is stationary in B."""
    up, down = pair
    lo, hi = bracket
    f_lo, f_hi = _domega_dB(species, up, down, lo), _domega_dB(species, up, down, hi)
    if f_lo * f_hi > 0:
        raise NoStationaryPointError(
            f"d(omega0)/dB does not change sign on [{lo}, {hi}] T ({f_lo:.3e}, {f_hi:.3e} rad/s/T)"
        )
    B_star = brentq(lambda B: _domega_dB(species, up, down, B), lo, hi, xtol=1e-13, rtol=1e-14)
    h = 1e-5
    curvature = (_domega_dB(species, up, down, B_star + h) - _domega_dB(species, up, down, B_star - h)) / (2 * h)
    return StationaryPoint(
        B=B_star,
        omega0=transition_frequency(species, up, down, B_star),
        slope=_domega_dB(species, up, down, B_star),
        curvature=curvature,
    )


@dataclass(frozen=True)
class QubitPair:
    """Two Zeeman levels used as |up>, |down> at bias field ``B0``.

    ``mu_x_updown`` is |<down|mu_x|up>|; the diagonal moments keep their sign.
    """

    species: IonSpecies
    up: ZeemanLevel
    down: ZeemanLevel
    B0: float
    omega0: float
    mu_z_up: float
    mu_z_down: float
    mu_x_updown: float

    @property
    def mu_eff(self) -> float:
        """Half-difference moment coupling to sigma_z."""
        return 0.5 * (self.mu_z_up - self.mu_z_down)

    @property
    def mu_common(self) -> float:
        return 0.5 * (self.mu_z_up + self.mu_z_down)

    def at_field(self, B0: float) -> "QubitPair":
        return make_qubit_pair(self.species, self.up.label, self.down.label, B0)


def make_qubit_pair(species: IonSpecies, up, down, B0: float) -> QubitPair:
    a = find_level(species, up, B0)
    b = find_level(species, down, B0)
    omega0 = transition_frequency(species, a, b, B0)
    if omega0 <= 0:
        raise ValueError(f"|up> {a.label} must lie above |down> {b.label} at B0 = {B0} T")
    return QubitPair(
        species=species,
        up=a,
        down=b,
        B0=B0,
        omega0=omega0,
        mu_z_up=moment_z(species, a, B0),
        mu_z_down=moment_z(species, b, B0),
        mu_x_updown=abs(dipole_matrix_element(species, b, a, "x", B0)),
    )
