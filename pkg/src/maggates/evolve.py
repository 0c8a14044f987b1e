"""Brute-force Schrodinger evolution of the interaction Hamiltonian on qubit x Fock space.

Basis ordering: qubits major, Fock minor.  Qubit index 0 is |up>, 1 is
|down>; a basis index decomposes as (s_1, ..., s_N, n_1, ..., n_M) in
row-major order.  Everything is in units with hbar = 1 (rad/s).

For each tone (omega, phi) and ion n the Hamiltonian carries exactly the
terms

    -exp(-i(omega t + phi)) [ Omega_x s+ e^{i w0 t} + Omega_z sz
        + sum_j (Omega_x_jn s+ e^{i w0 t} + Omega_z_jn sz)(e^{-i wj t} a_j + e^{i wj t} a_j^dag) ] + h.c.

selected by :class:`TermFlags`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .atomic import QubitPair, breit_rabi_levels, magnetic_moment_operator
from .constants import CONSTANTS
from .fields import DriveTone
from .gates import SIGMA_PLUS, SIGMA_Z, RabiSet

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12


class IntegrationError(RuntimeError):
    pass


class FockCutoffError(RuntimeError):
    """Population reached the top of the truncated Fock space."""


@dataclass(frozen=True)
class HilbertSpec:
    n_qubits: int
    modes: tuple[tuple[float, int], ...] = ()  # (omega_j rad/s, n_max)
    max_dim: int = 2**16

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple((float(w), int(n)) for w, n in self.modes))
        if self.n_qubits < 1:
            raise ValueError("need at least one qubit")
        for w, n in self.modes:
            if n < 4:
                raise ValueError(f"Fock cutoff must be >= 4, got {n}")
            if not w > 0:
                raise ValueError("mode frequencies must be positive")
        if self.dim > self.max_dim:
            raise ValueError(f"Hilbert space dimension {self.dim} exceeds cap {self.max_dim}")

    @property
    def fock_dims(self) -> tuple[int, ...]:
        return tuple(n + 1 for _, n in self.modes)

    @property
    def dims(self) -> tuple[int, ...]:
        return (2,) * self.n_qubits + self.fock_dims

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, spins: Sequence[int], fock: Sequence[int] = ()) -> int:
        return int(np.ravel_multi_index(tuple(spins) + tuple(fock), self.dims))

    def basis_label(self, k: int) -> str:
        idx = np.unravel_index(k, self.dims)
        spins = "".join("ud"[s] for s in idx[: self.n_qubits])
        fock = ",".join(str(n) for n in idx[self.n_qubits:])
        return f"{spins}|{fock}" if fock else spins


@dataclass(frozen=True)
class TermFlags:
    include_carrier_x: bool = True
    include_carrier_z: bool = True
    include_sideband_x: bool = True
    include_sideband_z: bool = True
    include_offresonant: bool = True

    def __post_init__(self):
        if not any((self.include_carrier_x, self.include_carrier_z, self.include_sideband_x, self.include_sideband_z)):
            raise ValueError("at least one Hamiltonian term must be enabled")


@dataclass
class SimState:
    psi: np.ndarray
    t: float = 0.0

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.psi))


def _embed(ops: dict[int, np.ndarray], dims) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for k, d in enumerate(dims):
        out = np.kron(out, ops.get(k, np.eye(d)))
    return out


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)


@dataclass(frozen=True)
class HamiltonianTerms:
    """H(t) = sum_e amps[e] exp(i freqs[fidx[e]] t) |rows[e]><cols[e]|."""

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    amps: np.ndarray
    fidx: np.ndarray
    freqs: np.ndarray

    def dense(self, t: float) -> np.ndarray:
        H = np.zeros((self.dim, self.dim), dtype=complex)
        np.add.at(H, (self.rows, self.cols), self.amps * np.exp(1j * self.freqs[self.fidx] * t))
        return H

    def negated(self) -> "HamiltonianTerms":
        return HamiltonianTerms(self.dim, self.rows, self.cols, -self.amps, self.fidx, self.freqs)


def terms_from_operators(dim: int, ops: list[tuple[complex, float, np.ndarray]]) -> HamiltonianTerms:
    """Collapse (coefficient, frequency, matrix) triples into sparse entries."""
    acc: dict[tuple[int, int, float], complex] = {}
    for g, nu, M in ops:
        if g == 0:
            continue
        r, c = np.nonzero(M)
        for i, j in zip(r, c):
            key = (int(i), int(j), float(nu))
            acc[key] = acc.get(key, 0.0) + g * M[i, j]
    keys = [k for k, v in acc.items() if v != 0]
    freqs = np.array(sorted({k[2] for k in keys}), dtype=float)
    fpos = {f: i for i, f in enumerate(freqs)}
    return HamiltonianTerms(
        dim=dim,
        rows=np.array([k[0] for k in keys], dtype=np.int64),
        cols=np.array([k[1] for k in keys], dtype=np.int64),
        amps=np.array([acc[k] for k in keys], dtype=complex),
        fidx=np.array([fpos[k[2]] for k in keys], dtype=np.int64),
        freqs=freqs,
    )


def resonance_cutoff(rabi: RabiSet, spec: HilbertSpec) -> float:
    """Terms with |frequency| above this are dropped when off-resonant terms are disabled."""
    if spec.modes:
        return 0.5 * min(w for w, _ in spec.modes)
    return 0.5 * abs(rabi.omega0)


def build_terms(tones: Sequence[DriveTone], rabi: RabiSet, flags: TermFlags, spec: HilbertSpec) -> HamiltonianTerms:
    N, M = spec.n_qubits, len(spec.modes)
    if rabi.n_ions != N or rabi.n_modes != M:
        raise ValueError(f"RabiSet covers {rabi.n_ions} ions x {rabi.n_modes} modes, Hilbert space {N} x {M}")
    for tone in tones:
        if not tone.omega > 0:
            raise ValueError(f"tone frequency must be positive, got {tone.omega}")
    dims = spec.dims
    w0 = rabi.omega0
    sp = [_embed({n: SIGMA_PLUS}, dims) for n in range(N)]
    sz = [_embed({n: SIGMA_Z}, dims) for n in range(N)]
    a = [_embed({N + j: annihilation(n_max)}, dims) for j, (_, n_max) in enumerate(spec.modes)]
    wj = [w for w, _ in spec.modes]
    cutoff = resonance_cutoff(rabi, spec)

    raw: list[tuple[complex, float, np.ndarray]] = []
    for tone in tones:
        ph = np.exp(-1j * tone.phase)
        w = tone.omega
        for n in range(N):
            if flags.include_carrier_x:
                raw.append((-rabi.Omega_x * ph, w0 - w, sp[n]))
            if flags.include_carrier_z:
                raw.append((-rabi.Omega_z * ph, -w, sz[n]))
            for j in range(M):
                if flags.include_sideband_x:
                    g = -rabi.Omega_x_jn[j, n] * ph
                    raw.append((g, w0 - w - wj[j], sp[n] @ a[j]))
                    raw.append((g, w0 - w + wj[j], sp[n] @ a[j].conj().T))
                if flags.include_sideband_z:
                    g = -rabi.Omega_z_jn[j, n] * ph
                    raw.append((g, -w - wj[j], sz[n] @ a[j]))
                    raw.append((g, -w + wj[j], sz[n] @ a[j].conj().T))
    if not flags.include_offresonant:
        raw = [r for r in raw if abs(r[1]) <= cutoff]
    full = raw + [(np.conj(g), -nu, Mx.conj().T) for g, nu, Mx in raw]
    return terms_from_operators(spec.dim, full)


def build_hamiltonian(t: float, tones, rabi: RabiSet, flags: TermFlags, spec: HilbertSpec) -> np.ndarray:
    """Dense interaction-picture Hamiltonian (rad/s) at time ``t``."""
    return build_terms(tones, rabi, flags, spec).dense(t)


def _run(terms: HamiltonianTerms, psi, t0, t1, rtol, atol, max_steps=50_000_000):
    y, t, h, n, status = _kernels.dopri_propagate(
        terms.rows, terms.cols, terms.amps, terms.fidx, terms.freqs, psi, t0, t1, rtol, atol, 0.0, max_steps
    )
    if status == _kernels.STEP_UNDERFLOW:
        raise IntegrationError(f"step size underflow at t = {t:.6e} s after {n} steps (h = {h:.3e} s)")
    if status == _kernels.MAX_STEPS:
        raise IntegrationError(f"step limit reached at t = {t:.6e} s after {n} steps")
    return y, n


@dataclass
class Integration:
    state: SimState
    nsteps: int
    times: np.ndarray | None = None
    samples: np.ndarray | None = None  # (len(times), dim[, ncols])


def integrate_terms(terms: HamiltonianTerms, psi0, t_final: float, t0: float = 0.0, rtol: float = DEFAULT_RTOL,
                    atol: float = DEFAULT_ATOL, t_eval=None) -> Integration:
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape[0] != terms.dim:
        raise ValueError(f"state has dimension {psi.shape[0]}, Hamiltonian {terms.dim}")
    if t_eval is None:
        y, n = _run(terms, psi, t0, t_final, rtol, atol)
        return Integration(SimState(y, t_final), n)
    t_eval = np.asarray(t_eval, dtype=float)
    samples = []
    t, y, total = t0, psi, 0
    for te in t_eval:
        if te != t:
            y, n = _run(terms, y, t, te, rtol, atol)
            total += n
            t = te
        samples.append(y.copy())
    if t != t_final:
        y, n = _run(terms, y, t, t_final, rtol, atol)
        total += n
    return Integration(SimState(y, t_final), total, t_eval, np.array(samples))


def integrate(tones, rabi: RabiSet, flags: TermFlags, spec: HilbertSpec, psi0: SimState | np.ndarray,
              t_final: float, tol: float = DEFAULT_RTOL, t_eval=None) -> Integration:
    """Adaptive Dormand-Prince integration from ``psi0`` (vector, or columns) to ``t_final``."""
    terms = build_terms(tones, rabi, flags, spec)
    if isinstance(psi0, SimState):
        psi, t0 = psi0.psi, psi0.t
    else:
        psi, t0 = psi0, 0.0
    norms = np.linalg.norm(np.atleast_2d(np.asarray(psi).T), axis=-1)
    if np.any(np.abs(norms - 1) > 1e-12):
        raise ValueError("initial state(s) must be normalised")
    return integrate_terms(terms, psi, t_final, t0=t0, rtol=tol, atol=tol * 1e-2, t_eval=t_eval)


def propagator(tones, rabi, flags, spec, t_final, tol=DEFAULT_RTOL, columns=None) -> np.ndarray:
    """Columns of U(t_final, 0) for the basis states in ``columns`` (default: all)."""
    cols = np.arange(spec.dim) if columns is None else np.asarray(columns)
    psi0 = np.zeros((spec.dim, cols.size), dtype=complex)
    psi0[cols, np.arange(cols.size)] = 1.0
    return integrate(tones, rabi, flags, spec, psi0, t_final, tol).state.psi


# ---------------------------------------------------------------------------
# fidelities
# ---------------------------------------------------------------------------

def gate_fidelity(numeric, target) -> float:
    """State overlap |<target|psi>|^2 for vectors, |tr(U_t^dag U)|^2 / d^2 for square matrices."""
    a = np.asarray(numeric, dtype=complex)
    b = np.asarray(target, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.ndim == 1:
        return float(min(1.0, abs(np.vdot(b, a)) ** 2))
    d = a.shape[0]
    return float(min(1.0, abs(np.trace(b.conj().T @ a)) ** 2 / d**2))


def spin_block(columns: np.ndarray, spec: HilbertSpec, fock: Sequence[int]) -> np.ndarray:
    """<s'|<n| U |s>|n> for spin states s, s' and a fixed Fock configuration.

    ``columns`` holds U applied to |s>|n> for s = 0 .. 2^N - 1 in order.
    """
    rows = [spec.index(np.unravel_index(s, (2,) * spec.n_qubits), fock) for s in range(2**spec.n_qubits)]
    return columns[rows, :]


def spin_columns(spec: HilbertSpec, fock: Sequence[int]) -> np.ndarray:
    cols = [spec.index(np.unravel_index(s, (2,) * spec.n_qubits), fock) for s in range(2**spec.n_qubits)]
    psi = np.zeros((spec.dim, len(cols)), dtype=complex)
    psi[cols, np.arange(len(cols))] = 1.0
    return psi


def motional_purity(psi: np.ndarray, spec: HilbertSpec) -> float:
    """Purity of the reduced motional state of a pure state ``psi``."""
    m = int(np.prod(spec.fock_dims))
    mat = psi.reshape(2**spec.n_qubits, m)
    rho = mat.T @ mat.conj()
    return float(np.real(np.trace(rho @ rho)))


def top_fock_population(psi: np.ndarray, spec: HilbertSpec) -> float:
    """Largest population in the top two Fock levels of any mode."""
    p = np.abs(psi.reshape(spec.dims + psi.shape[1:])) ** 2
    worst = 0.0
    for j in range(len(spec.modes)):
        ax = spec.n_qubits + j
        pj = np.moveaxis(p, ax, 0)
        worst = max(worst, float(pj[-2:].sum() / max(1, psi.shape[1] if psi.ndim > 1 else 1)))
    return worst


@dataclass
class GateSimulation:
    """Everything needed to run the oracle for one gate."""

    tones: list[DriveTone]
    rabi: RabiSet
    flags: TermFlags
    spec: HilbertSpec
    t_final: float
    target: np.ndarray  # analytic spin propagator
    tol: float = DEFAULT_RTOL

    def spin_propagator(self, fock: Sequence[int] | None = None, check_cutoff: bool = True):
        fock = tuple(fock) if fock is not None else (0,) * len(self.spec.modes)
        psi0 = spin_columns(self.spec, fock)
        out = integrate(self.tones, self.rabi, self.flags, self.spec, psi0, self.t_final, self.tol).state.psi
        if check_cutoff:
            top = top_fock_population(out, self.spec)
            if top > 1e-8:
                raise FockCutoffError(f"population {top:.2e} in the top two Fock levels; raise n_max")
        return spin_block(out, self.spec, fock), out

    def fidelity(self, fock=None) -> float:
        block, _ = self.spin_propagator(fock)
        return gate_fidelity(block, self.target)


def gate_simulation(setup, flags: TermFlags | None = None, n_max: int = 12, tol: float = DEFAULT_RTOL) -> GateSimulation:
    """Single-mode oracle configuration for a :class:`~maggates.scenarios.GateSetup`."""
    j = setup.mode_index
    rabi = setup.rabi
    one = RabiSet(rabi.Omega_x, rabi.Omega_z, rabi.Omega_x_jn[j:j + 1], rabi.Omega_z_jn[j:j + 1],
                  rabi.omega0, rabi.mode_frequencies[j:j + 1], rabi.flags)
    if flags is None:
        flags = TermFlags(include_offresonant=False)
    spec = HilbertSpec(n_qubits=2, modes=((float(rabi.mode_frequencies[j]), n_max),))
    return GateSimulation(setup.spec.tones(), one, flags, spec, setup.spec.tau, setup.report().propagator, tol)


def fock_independence_scan(sim: GateSimulation, n_list: Sequence[int]) -> dict[int, float]:
    """Spin-propagator fidelity against the analytic target for initial Fock states in ``n_list``."""
    n_max = sim.spec.modes[0][1]
    if max(n_list) + 4 > n_max:
        raise FockCutoffError(f"n_max = {n_max} too small for initial states up to n = {max(n_list)}")
    out = {}
    for n in n_list:
        fock = (n,) + (0,) * (len(sim.spec.modes) - 1)
        out[int(n)] = sim.fidelity(fock)
    return out


# ---------------------------------------------------------------------------
# single-ion, full hyperfine manifold: residual-field phase oracle
# ---------------------------------------------------------------------------

def manifold_terms(pair: QubitPair, tones: Sequence[DriveTone], field_amplitude) -> HamiltonianTerms:
    """-mu . B cos(omega t + phi) for every tone, in the interaction frame of the static Breit-Rabi Hamiltonian."""
    species = pair.species
    levels = breit_rabi_levels(species, pair.B0)
    vecs = np.array([lv.eigenvector for lv in levels]).T
    E = 2 * math.pi * np.array([lv.energy for lv in levels])
    Bv = np.asarray(field_amplitude, dtype=float)
    V = -sum(Bv[i] * magnetic_moment_operator(species, ax) for i, ax in enumerate("xyz"))
    Vm = vecs.conj().T @ V @ vecs / CONSTANTS.hbar
    dim = len(levels)
    ops = []
    for tone in tones:
        for k in range(dim):
            for l in range(dim):
                if Vm[k, l] == 0:
                    continue
                M = np.zeros((dim, dim))
                M[k, l] = 1.0
                w_kl = E[k] - E[l]
                ops.append((0.5 * Vm[k, l] * np.exp(1j * tone.phase), w_kl + tone.omega, M))
                ops.append((0.5 * Vm[k, l] * np.exp(-1j * tone.phase), w_kl - tone.omega, M))
    return terms_from_operators(dim, ops)


def manifold_phase(pair: QubitPair, tones: Sequence[DriveTone], field_amplitude, tau: float,
                   tol: float = 1e-9) -> float:
    """Numerically integrated single-qubit phase theta (U ~ exp(-i theta sigma_z)) after ``tau``."""
    levels = breit_rabi_levels(pair.species, pair.B0)
    labels = [lv.label for lv in levels]
    iu, idn = labels.index(pair.up.label), labels.index(pair.down.label)
    terms = manifold_terms(pair, tones, field_amplitude)
    psi0 = np.zeros((terms.dim, 2), dtype=complex)
    psi0[iu, 0] = 1.0
    psi0[idn, 1] = 1.0
    out = integrate_terms(terms, psi0, tau, rtol=tol, atol=tol * 1e-2).state.psi
    return 0.5 * (np.angle(out[idn, 1]) - np.angle(out[iu, 0]))


# ---------------------------------------------------------------------------
# plain-text artefacts
# ---------------------------------------------------------------------------

def write_state(path, state: SimState, spec: HilbertSpec | None = None) -> None:
    """Dump a state vector: header lines start with '#', then 'index re im' per line."""
    lines = ["# maggates state v1", f"# dim {state.psi.size}", f"# t {float(state.t)!r}"]
    if spec is not None:
        lines.append("# dims " + " ".join(str(d) for d in spec.dims))
    for k, c in enumerate(state.psi):
        lines.append(f"{k} {float(c.real)!r} {float(c.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_state(path) -> SimState:
    t = 0.0
    dim = None
    entries = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "t":
                t = float(parts[1])
            elif parts and parts[0] == "dim":
                dim = int(parts[1])
            continue
        k, re, im = line.split()
        entries.append((int(k), complex(float(re), float(im))))
    psi = np.zeros(dim if dim is not None else len(entries), dtype=complex)
    for k, c in entries:
        psi[k] = c
    return SimState(psi, t)


def trajectory_rows(integration: Integration, spec: HilbertSpec, watchlist: Sequence[int]):
    """Rows (t, norm, p_watch...) for a single-vector integration with samples."""
    header = ["t", "norm"] + [f"p_{spec.basis_label(k)}" for k in watchlist]
    rows = []
    for t, psi in zip(integration.times, integration.samples):
        rows.append([t, float(np.linalg.norm(psi))] + [float(abs(psi[k]) ** 2) for k in watchlist])
    return header, rows
