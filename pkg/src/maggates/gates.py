"""Rabi frequencies, analytic gate propagators, drive currents and error budget.

Conventions used throughout:

* single-qubit basis ordering is (|up>, |down>), so sigma_z = diag(1, -1);
  two-qubit states are ordered uu, ud, du, dd (ion 1 major);
* carrier pi time t_pi = pi / (2 Omega_x) with
  Omega_x = B_x |<down|mu_x|up>| / (2 hbar);
* the sigma_z coupling uses mu_eff = (<up|mu_z|up> - <down|mu_z|down>) / 2;
* single-qubit phases theta are quoted as U = exp(-i theta sigma_z), i.e.
  half the relative phase between |up> and |down>;
* single-loop gates: tau = 2 pi / delta and |Omega_{j,n}| = delta / 4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .atomic import QubitPair, breit_rabi_levels, magnetic_moment_operator
from .chain import ModeDecomposition
from .constants import CONSTANTS
from .fields import DriveTone, FieldSample, FiveWireDesign, pickup_field

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |up><down|
TWO_QUBIT_LABELS = ("uu", "ud", "du", "dd")

_AXIS = {"x": 0, "y": 1, "z": 2}


class GateError(ValueError):
    pass


class UnsupportedConfigurationError(GateError):
    pass


@dataclass(frozen=True)
class RabiSet:
    """Rabi frequencies (rad/s) for one drive amplitude.

    ``Omega_x_jn[j, n]`` and ``Omega_z_jn[j, n]`` carry the sign of b_{j,n}
    and of the field gradient.  ``omega0`` and ``mode_frequencies`` are the
    transition and mode frequencies the rates refer to.
    """

    Omega_x: float
    Omega_z: float
    Omega_x_jn: np.ndarray
    Omega_z_jn: np.ndarray
    omega0: float
    mode_frequencies: np.ndarray
    flags: tuple[str, ...] = ()

    @property
    def n_ions(self) -> int:
        return self.Omega_x_jn.shape[1]

    @property
    def n_modes(self) -> int:
        return self.Omega_x_jn.shape[0]

    def scaled(self, s: float) -> "RabiSet":
        return RabiSet(
            s * self.Omega_x, s * self.Omega_z, s * self.Omega_x_jn, s * self.Omega_z_jn,
            self.omega0, self.mode_frequencies, self.flags,
        )


def rabi_frequencies(field_per_amp: FieldSample, current: float, pair: QubitPair, modes: ModeDecomposition) -> RabiSet:
    """Evaluate the four Rabi-frequency definitions for a drive of amplitude ``current``.

    ``field_per_amp`` is the field and Jacobian at the ion equilibrium for 1 A
    in the drive channel; derivatives are taken along ``modes.axis``.
    """
    hbar = CONSTANTS.hbar
    B = field_per_amp.B * current
    jac = field_per_amp.jacobian * current
    q = _AXIS[modes.axis]
    dBx, dBz = jac[0, q], jac[2, q]
    scale = modes.vectors * modes.q0[:, None]  # b_{j,n} q0^j
    flags = []
    if pair.mu_x_updown == 0:
        flags.append("zero transverse matrix element: Omega_x terms vanish")
    if pair.mu_eff == 0:
        flags.append("equal diagonal moments: Omega_z terms vanish")
    return RabiSet(
        Omega_x=B[0] * pair.mu_x_updown / (2 * hbar),
        Omega_z=B[2] * pair.mu_eff / (2 * hbar),
        Omega_x_jn=scale * dBx * pair.mu_x_updown / (2 * hbar),
        Omega_z_jn=scale * dBz * pair.mu_eff / (2 * hbar),
        omega0=pair.omega0,
        mode_frequencies=np.array(modes.frequencies, dtype=float),
        flags=tuple(flags),
    )


def carrier_rotation(Omega_x: float, phase: float, t: float) -> np.ndarray:
    """Resonant carrier propagator exp(i Omega t sigma_phi), basis (up, down).

    Rotation angle 2 Omega t about (cos phi, sin phi, 0); a pi pulse takes
    t = pi / (2 Omega).
    """
    s_phi = math.cos(phase) * SIGMA_X + math.sin(phase) * SIGMA_Y
    a = Omega_x * t
    return math.cos(a) * np.eye(2) + 1j * math.sin(a) * s_phi


def pi_time(Omega_x: float) -> float:
    return math.pi / (2 * abs(Omega_x))


def phase_space_trajectory(Omega: float, delta: float, t) -> np.ndarray:
    """alpha(t) = (Omega / delta)(exp(i delta t) - 1): a circle through 0, counter-clockwise for delta > 0."""
    if delta == 0:
        raise GateError("detuning must be nonzero")
    t = np.asarray(t, dtype=float)
    return (Omega / delta) * np.expm1(1j * delta * t)


def _pauli_phi(phi: float) -> np.ndarray:
    return math.cos(phi) * SIGMA_X + math.sin(phi) * SIGMA_Y


def _single(op, n, N):
    mats = [np.eye(2)] * N
    mats[n] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def sigma_phi_basis(phi: float) -> np.ndarray:
    """Unitary R with R sigma_z R^dagger = sigma_phi; columns are the +/- eigenvectors."""
    e = np.exp(1j * phi)
    return np.array([[1, 1], [e, -e]], dtype=complex) / math.sqrt(2)


def geometric_phase_propagator(couplings, delta: float, phi: float | None = None) -> np.ndarray:
    """exp[(2 pi i / delta^2) (sum_n c_n s_n)^2] for s = sigma_z (phi None) or sigma_phi."""
    if delta == 0:
        raise GateError("detuning must be nonzero (tau = 2 pi / delta diverges)")
    couplings = np.asarray(couplings, dtype=float)
    N = couplings.size
    op = SIGMA_Z if phi is None else _pauli_phi(phi)
    S = sum(c * _single(op, n, N) for n, c in enumerate(couplings))
    w, V = np.linalg.eigh(S)
    return (V * np.exp(2j * math.pi * w**2 / delta**2)) @ V.conj().T


@dataclass(frozen=True)
class GateSpec:
    """Gate configuration.  ``kind`` is 'zz' or 'phiphi'."""

    kind: str
    mode_index: int
    mode_axis: str
    mode_frequency: float
    q0: float
    delta: float
    current: float
    pair: QubitPair
    phase_b: float = 0.0
    phase_r: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zz", "phiphi"):
            raise ValueError(f"gate kind must be 'zz' or 'phiphi', got {self.kind!r}")
        if self.delta == 0:
            raise GateError("detuning must be nonzero")

    @property
    def tau(self) -> float:
        return 2 * math.pi / abs(self.delta)

    @property
    def phase_s(self) -> float:
        return 0.5 * (self.phase_b + self.phase_r)

    def tones(self) -> list[DriveTone]:
        wj, d = self.mode_frequency, self.delta
        if self.kind == "zz":
            return [DriveTone(wj - d, 0.0)]
        w0 = self.pair.omega0
        return [DriveTone(w0 + wj - d, self.phase_b), DriveTone(w0 - wj + d, self.phase_r)]


@dataclass
class GateReport:
    kind: str
    delta: float
    tau: float
    propagator: np.ndarray
    basis_labels: tuple[str, ...]
    phases: np.ndarray  # rad, per basis state of the gate eigenbasis
    times: np.ndarray
    trajectories: dict[str, np.ndarray]
    couplings: np.ndarray  # Omega_{j,n} used (rad/s)
    required_current: float | None = None
    budget: "ErrorBudget | None" = None
    notes: list[str] = field(default_factory=list)

    @property
    def alpha_max(self) -> dict[str, float]:
        return {k: float(np.max(np.abs(v))) for k, v in self.trajectories.items()}


def _signs(N):
    return [np.array([1 - 2 * ((s >> (N - 1 - n)) & 1) for n in range(N)]) for s in range(2**N)]


def _trajectories(couplings, delta, labels, n_samples):
    t = np.linspace(0.0, 2 * math.pi / abs(delta), n_samples)
    traj = {}
    for lab, s in zip(labels, _signs(couplings.size)):
        traj[lab] = phase_space_trajectory(float(couplings @ s), delta, t)
    return t, traj


def sigma_zz_gate(rabi: RabiSet, j: int, delta: float, n_samples: int = 257) -> GateReport:
    """Closed-loop sigma_z sigma_z propagator for mode ``j`` (two ions)."""
    if rabi.n_ions != 2:
        raise GateError("the two-qubit propagator is emitted for two ions only")
    c = np.asarray(rabi.Omega_z_jn[j], dtype=float)
    U = geometric_phase_propagator(c, delta)
    t, traj = _trajectories(c, delta, TWO_QUBIT_LABELS, n_samples)
    phases = np.array([2 * math.pi * float(c @ s) ** 2 / delta**2 for s in _signs(2)])
    return GateReport("zz", delta, 2 * math.pi / abs(delta), U, TWO_QUBIT_LABELS, phases, t, traj, c)


def sigma_phiphi_gate(rabi: RabiSet, j: int, delta: float, phase_b: float, phase_r: float,
                      amplitudes=(1.0, 1.0), n_samples: int = 257) -> GateReport:
    """Bichromatic sideband gate acting on sigma_phi_s eigenstates, phi_s = (phi_b + phi_r) / 2."""
    if not math.isclose(amplitudes[0], amplitudes[1], rel_tol=1e-12):
        raise UnsupportedConfigurationError(f"blue and red tones need equal amplitudes, got {amplitudes}")
    if rabi.n_ions != 2:
        raise GateError("the two-qubit propagator is emitted for two ions only")
    phi_s = 0.5 * (phase_b + phase_r)
    c = np.asarray(rabi.Omega_x_jn[j], dtype=float) * amplitudes[0]
    U = geometric_phase_propagator(c, delta, phi_s)
    labels = ("++", "+-", "-+", "--")
    t, traj = _trajectories(c, delta, labels, n_samples)
    phases = np.array([2 * math.pi * float(c @ s) ** 2 / delta**2 for s in _signs(2)])
    rep = GateReport("phiphi", delta, 2 * math.pi / abs(delta), U, labels, phases, t, traj, c)
    rep.notes.append(f"eigenbasis of sigma_phi with phi_s = {phi_s:.6f} rad")
    return rep


def _gate_coupling_per_amp(field_per_amp, modes, j, pair, kind):
    rabi = rabi_frequencies(field_per_amp, 1.0, pair, modes)
    c = rabi.Omega_z_jn[j] if kind == "zz" else rabi.Omega_x_jn[j]
    mags = np.abs(c)
    if not np.allclose(mags, mags[0], rtol=1e-9):
        raise UnsupportedConfigurationError(f"single-loop solver needs equal |Omega_jn| on all ions, got {c}")
    return float(mags[0])


def gate_time_for_current(current: float, field_per_amp: FieldSample, modes: ModeDecomposition, j: int,
                          pair: QubitPair, kind: str) -> float:
    """tau = 2 pi / delta with delta = 4 |Omega_{j,n}(current)|."""
    per_amp = _gate_coupling_per_amp(field_per_amp, modes, j, pair, kind)
    return 2 * math.pi / (4 * per_amp * abs(current))


def solve_gate_current(tau: float, field_per_amp: FieldSample, modes: ModeDecomposition, j: int,
                       pair: QubitPair, kind: str) -> float:
    """Drive amplitude giving a maximally entangling single-loop gate of duration ``tau``."""
    if kind not in ("zz", "phiphi"):
        raise ValueError(f"gate kind must be 'zz' or 'phiphi', got {kind!r}")
    per_amp = _gate_coupling_per_amp(field_per_amp, modes, j, pair, kind)
    if per_amp == 0:
        raise GateError(f"{kind} gate unattainable: zero coupling per amp on mode {j}")
    current = (math.pi / (2 * tau)) / per_amp
    back = gate_time_for_current(current, field_per_amp, modes, j, pair, kind)
    if abs(back - tau) > 1e-10 * tau:  # pragma: no cover
        raise GateError(f"forward check failed: {back} vs {tau}")
    return current


# ---------------------------------------------------------------------------
# error budget
# ---------------------------------------------------------------------------

def ac_zeeman_shifts(pair: QubitPair, field_amplitude, omega: float) -> np.ndarray:
    """Second-order shifts (rad/s) of (up, down) from -mu . B cos(omega t), summed over all hyperfine levels.

    Returns an array of shape (2, n_levels) with the contribution of each
    intermediate level to the up and down shifts.
    """
    species, B0 = pair.species, pair.B0
    levels = breit_rabi_levels(species, B0)
    Bv = np.asarray(field_amplitude, dtype=float)
    V = -sum(Bv[i] * magnetic_moment_operator(species, ax) for i, ax in enumerate("xyz") if Bv[i] != 0)
    if np.isscalar(V):
        return np.zeros((2, len(levels)))
    vecs = np.array([lv.eigenvector for lv in levels]).T
    Vm = vecs.conj().T @ V @ vecs
    energies = 2 * math.pi * np.array([lv.energy for lv in levels])  # rad/s
    out = np.zeros((2, len(levels)))
    hbar = CONSTANTS.hbar
    for r, lv in enumerate((pair.up, pair.down)):
        i = next(k for k, l in enumerate(levels) if l.label == lv.label)
        for k in range(len(levels)):
            if k == i:
                continue
            w_ik = energies[i] - energies[k]
            c = abs(Vm[k, i]) ** 2 / (4 * hbar**2)
            out[r, k] = c * (1 / (w_ik + omega) + 1 / (w_ik - omega))
    return out


@dataclass(frozen=True)
class BudgetLine:
    mechanism: str
    tone: str
    phase: float  # rad, theta in exp(-i theta sigma_z)


@dataclass
class ErrorBudget:
    displacement: np.ndarray
    residual_field: np.ndarray  # T amplitude at the displaced ion
    lines: list[BudgetLine]
    electric_equivalence: float | None  # V
    electric_equivalence_mu_eff: float | None
    anharmonic_suppression: float
    notes: list[str] = field(default_factory=list)

    def mechanism_totals(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for ln in self.lines:
            out[ln.mechanism] = out.get(ln.mechanism, 0.0) + ln.phase
        return out

    @property
    def total_phase(self) -> float:
        return float(sum(ln.phase for ln in self.lines))

    @property
    def worst_mechanism(self) -> tuple[str, float]:
        tot = self.mechanism_totals()
        name = max(tot, key=lambda k: abs(tot[k]))
        return name, tot[name]

    @property
    def max_phase(self) -> float:
        """|net single-qubit phase|; mechanisms of opposite sign are allowed to cancel."""
        return abs(self.total_phase)


def residual_phase_lines(pair: QubitPair, tones, labels, field_amplitude, tau: float) -> list[BudgetLine]:
    """Single-qubit phases accumulated over ``tau`` from a residual field of the given amplitude per tone."""
    species, hbar = pair.species, CONSTANTS.hbar
    Bv = np.asarray(field_amplitude, dtype=float)
    mu = [magnetic_moment_operator(species, ax) for ax in "xyz"]
    up, dn = pair.up.eigenvector, pair.down.eigenvector
    mu_ud = sum(Bv[i] * (up.conj() @ mu[i] @ dn) for i in range(3))
    mu_diag = sum(Bv[i] * ((up.conj() @ mu[i] @ up) - (dn.conj() @ mu[i] @ dn)).real for i in range(3)) / 2
    Omega = abs(mu_ud) / (2 * hbar)
    w0 = pair.omega0
    lines = []
    for tone, lab in zip(tones, labels):
        w = tone.omega
        rwa = Omega**2 / (w0 - w) * tau
        cr = Omega**2 / (w0 + w) * tau
        full = ac_zeeman_shifts(pair, Bv, w).sum(axis=1)
        total2 = 0.5 * (full[0] - full[1]) * tau
        first = 0.0
        if mu_diag != 0 and w > 0:
            first = -(mu_diag / hbar) * (math.sin(w * tau + tone.phase) - math.sin(tone.phase)) / w
        lines += [
            BudgetLine("carrier_rwa", lab, rwa),
            BudgetLine("carrier_counter_rotating", lab, cr),
            BudgetLine("spectator_levels", lab, total2 - rwa - cr),
            BudgetLine("zeeman_first_order", lab, first),
        ]
    return lines


def electric_equivalence_potential(gradient: float, mu_z: float, pickup: float) -> float:
    """Electrode potential whose electric force e E equals |mu_z * gradient|."""
    if pickup == 0:
        raise GateError("zero electrode pickup: no potential can balance the magnetic force")
    return abs(mu_z * gradient) / (CONSTANTS.elementary_charge * abs(pickup))


def anharmonic_suppression(q0: float, d0: float) -> float:
    """(q0 / d0)^2: relative size of higher-order Rabi-rate terms."""
    if not (q0 > 0 and d0 > 0):
        raise ValueError("q0 and d0 must be positive")
    return (q0 / d0) ** 2


def residual_error_budget(design: FiveWireDesign, displacement, spec: GateSpec, pair: QubitPair | None = None) -> ErrorBudget:
    """Error budget for an ion displaced from the field null by ``displacement`` (m, (x, y, z))."""
    pair = spec.pair if pair is None else pair
    disp = np.asarray(displacement, dtype=float)
    sample = design.gradient_field(spec.current)
    residual = sample.B + sample.jacobian @ disp
    tones = spec.tones()
    labels = ["drive"] if spec.kind == "zz" else ["blue", "red"]
    lines = residual_phase_lines(pair, tones, labels, residual, spec.tau)

    notes = ["phases quoted as theta in exp(-i theta sigma_z) (half the up/down relative phase)"]
    v_eq = v_eq_eff = None
    if spec.kind == "zz":
        axis = spec.mode_axis
        grad = abs(sample.jacobian[2, _AXIS[axis]])
        pick = pickup_field(design.conductor("a"), 1.0, design.ion)[_AXIS[axis]]
        v_eq = electric_equivalence_potential(grad, pair.mu_z_up, pick)
        v_eq_eff = electric_equivalence_potential(grad, pair.mu_eff, pick)
        notes.append("electric equivalence uses the |up> moment; the mu_eff value is listed alongside")
        notes.append("electrode geometry is a fitted, non-unique solution; pickup depends on the centre width")
    else:
        notes.append("residual phases commute with sigma_z but not in general with the sigma_phi_s generator; "
                     "a smooth global envelope or echo is assumed to remove them")
    return ErrorBudget(
        displacement=disp,
        residual_field=residual,
        lines=lines,
        electric_equivalence=v_eq,
        electric_equivalence_mu_eff=v_eq_eff,
        anharmonic_suppression=anharmonic_suppression(spec.q0, design.d0),
        notes=notes,
    )
