"""The reproduction suite: each criterion is a function returning a :class:`Criterion`.

All checks are deterministic; no random numbers are drawn.  Property-style
checks run over fixed parameter grids here and over hypothesis-generated
inputs in the test suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import evolve as ev
from .atomic import field_independent_point, make_qubit_pair
from .chain import ChainConfig, ground_state_extent, normal_modes
from .config import RunConfig
from .constants import CONSTANTS, get_species
from .fields import Conductor, design_five_wire, field_of_layout
from .gates import (anharmonic_suppression, carrier_rotation, geometric_phase_propagator,
                    phase_space_trajectory, pi_time, rabi_frequencies)
from .scenarios import ZZ_PAIR, build_gate_setup

PUBLISHED = {
    "q0": 10e-9,
    "B0": 12e-3,
    "t_pi": 1e-6,
    "I_phiphi": 1.7,
    "I_zz": 1.3,
    "phase": 43e-3,
    "V_eq": 2.3e-6,
    "anharmonic": 1.2e-7,
}


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool
    measured: str
    target: str
    details: list[str] = field(default_factory=list)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:>2}. {self.title}: {self.measured} (target {self.target})"


class Context:
    """Objects shared by several criteria, built lazily from a run configuration."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self._setups = {}
        self.norm_drifts: list[float] = []

    @cached_property
    def species(self):
        return get_species(self.cfg.species.name, **self.cfg.species.overrides)

    @cached_property
    def clock(self):
        q = self.cfg.qubit
        return field_independent_point(self.species, (q.up, q.down))

    @cached_property
    def B0(self) -> float:
        return self.cfg.qubit.bias if self.cfg.qubit.bias is not None else self.clock.B

    @cached_property
    def design(self):
        return design_five_wire(self.cfg.geometry.d0)

    def setup(self, kind: str):
        if kind not in self._setups:
            g, ch = self.cfg.gate, self.cfg.chain
            labels = None
            if g.kind == kind and g.up is not None:
                labels = (g.up, g.down)
            elif kind == "phiphi":
                labels = (self.cfg.qubit.up, self.cfg.qubit.down)
            else:
                labels = ZZ_PAIR
            kw = dict(tau=g.tau, delta=g.delta, current=g.current) if g.kind == kind else dict(tau=g.tau or 20e-6)
            axis = g.mode_axis if g.kind == kind else None
            self._setups[kind] = build_gate_setup(
                kind, species=self.species, pair_labels=labels, B0=self.B0, d0=self.cfg.geometry.d0,
                mode_frequency=ch.mode_frequency, mode_axis=axis, mode_kind=ch.mode_kind,
                omega_axial=ch.omega_axial, phase_b=g.phase_b, phase_r=g.phase_r, design=self.design, **kw,
            )
        return self._setups[kind]

    @cached_property
    def carrier(self):
        pair = make_qubit_pair(self.species, self.cfg.qubit.up, self.cfg.qubit.down, self.B0)
        modes = self.setup("phiphi").modes
        rabi = rabi_frequencies(self.design.rotation_field(1.0), self.cfg.carrier.current, pair, modes)
        return pair, rabi

    def simulation(self, kind: str, n_max: int | None = None):
        e = self.cfg.evolve
        flags = ev.TermFlags(**e.flags)
        return ev.gate_simulation(self.setup(kind), flags, n_max or e.n_max, e.tol)


def _within(x, target, rel):
    return abs(x / target - 1) <= rel


def criterion_1(ctx: Context) -> Criterion:
    q0 = ground_state_extent(ctx.species.mass, ctx.cfg.chain.mode_frequency)
    return Criterion(1, "ground-state extent", abs(q0 - 10e-9) <= 1e-9, f"{q0 * 1e9:.3f} nm", "10 +/- 1 nm")


def criterion_2(ctx: Context) -> Criterion:
    sp = ctx.clock
    slope = abs(sp.slope) * 1e-3  # rad/s per mT
    ok = abs(sp.B - 12e-3) <= 0.5e-3 and slope < 2 * math.pi * 10
    return Criterion(
        2, "clock point", ok, f"B0 = {sp.B * 1e3:.4f} mT, |dw0/dB| = {slope / (2 * math.pi):.2e} Hz/mT",
        "12.0 +/- 0.5 mT, |dw0/dB| < 10 Hz/mT",
        [f"omega0/2pi = {sp.omega0 / (2 * math.pi) / 1e6:.6f} MHz, curvature {sp.curvature / (2 * math.pi):.4e} Hz/T^2"],
    )


def criterion_3(ctx: Context) -> Criterion:
    pair, rabi = ctx.carrier
    t = pi_time(rabi.Omega_x)
    bx = ctx.design.rotation_field(ctx.cfg.carrier.current).Bx
    det = [
        f"|<down|mu_x|up>| = {pair.mu_x_updown / CONSTANTS.muB:.6f} muB",
        f"B_x = {abs(bx) * 1e6:.3f} uT at {ctx.cfg.carrier.current * 1e3:g} mA",
        "Omega_x = B_x |mu_x| / (2 hbar); pi pulse t = pi / (2 Omega_x)",
    ]
    return Criterion(3, "carrier pi time", _within(t, PUBLISHED["t_pi"], 0.4), f"{t * 1e6:.4f} us", "1.0 us +/- 40 %", det)


def criterion_4(ctx: Context) -> Criterion:
    s = ctx.setup("phiphi")
    return Criterion(4, "sigma_phi sigma_phi drive current", _within(s.current, PUBLISHED["I_phiphi"], 0.3),
                     f"{s.current:.4f} A at tau = {s.spec.tau * 1e6:.3f} us", "1.7 A +/- 30 %")


def criterion_5(ctx: Context) -> Criterion:
    s = ctx.setup("zz")
    p = s.pair
    mb = CONSTANTS.muB
    det = [
        f"mu_z{p.up.label} = {p.mu_z_up / mb:+.6f} muB, mu_z{p.down.label} = {p.mu_z_down / mb:+.6f} muB",
        f"mu_eff = (mu_up - mu_down) / 2 = {p.mu_eff / mb:+.6f} muB",
    ]
    return Criterion(5, "sigma_z sigma_z drive current", _within(s.current, PUBLISHED["I_zz"], 0.5),
                     f"{s.current:.4f} A at tau = {s.spec.tau * 1e6:.3f} us", "1.3 A +/- 50 %", det)


def criterion_6(ctx: Context, oracle_tol: float = 1e-9) -> Criterion:
    disp = ctx.cfg.errors.displacement
    det, phases, worst_rel = [], [], 0.0
    for kind in ("phiphi", "zz"):
        s = ctx.setup(kind)
        b = s.report(displacement=disp).budget
        num = ev.manifold_phase(s.pair, s.spec.tones(), b.residual_field, s.spec.tau, tol=oracle_tol)
        rel = abs(num - b.total_phase) / abs(num)
        worst_rel = max(worst_rel, rel)
        phases.append(abs(b.total_phase))
        name, val = b.worst_mechanism
        det.append(f"{kind}: analytic theta = {b.total_phase * 1e3:+.2f} mrad, oracle {num * 1e3:+.2f} mrad "
                   f"(rel. diff {rel:.2e}); largest mechanism {name} {val * 1e3:+.2f} mrad")
        for mech, v in b.mechanism_totals().items():
            det.append(f"    {mech}: {v * 1e3:+.3f} mrad")
    m = max(phases)
    ok = PUBLISHED["phase"] / 3 <= m <= 3 * PUBLISHED["phase"] and m < 0.150 and worst_rel < 0.10
    dtxt = ", ".join(f"{d * 1e9:g}" for d in disp)
    det.append(f"phase convention: U = exp(-i theta sigma_z); displacement (x, y, z) = ({dtxt}) nm")
    return Criterion(6, "residual single-qubit phase", ok,
                     f"max |theta| = {m * 1e3:.2f} mrad, oracle agreement {worst_rel:.1e}",
                     "14.3..129 mrad and < 150 mrad; oracle within 10 %", det)


def criterion_7(ctx: Context) -> Criterion:
    b = ctx.setup("zz").report(displacement=ctx.cfg.errors.displacement).budget
    v = b.electric_equivalence
    det = [f"with mu_eff instead of mu_up: {b.electric_equivalence_mu_eff * 1e6:.4f} uV"] + list(b.notes[1:])
    return Criterion(7, "electric equivalence potential", 0.5 <= v / PUBLISHED["V_eq"] <= 2.0,
                     f"{v * 1e6:.4f} uV", "2.3 uV within a factor of 2", det)


def criterion_8(ctx: Context) -> Criterion:
    d = ctx.design
    d0 = d.d0
    bx = abs(field_of_layout(d.conductors, d.rotation_currents, d.ion).Bx) * d0
    g = d.gradient_field(1.0)
    grad = abs(g.gradient("z", "x")) * d0**2
    null = np.linalg.norm(g.B) / max(np.linalg.norm(field_of_layout([c], {c.name: d.gradient_currents[c.name]}, d.ion).B)
                                     for c in d.conductors)
    ok = _within(bx, 1.5e-7, 0.05) and _within(grad, 2.5e-7, 0.05) and null < 1e-6
    return Criterion(8, "five-wire design", ok,
                     f"Bx d0 = {bx:.4e} T m/A, grad d0^2 = {grad:.4e} T m/A, null {null:.1e}",
                     "1.5e-7 and 2.5e-7 within 5 %, null < 1e-6", list(d.notes))


def _differential_phase_grid():
    worst_phase, worst_alpha = 0.0, 0.0
    for Om in np.geomspace(1e2, 1e6, 9):
        for sign in (1, -1):
            delta = sign * 4 * Om
            U = geometric_phase_propagator(np.array([Om, Om]), delta)
            ph = np.angle(np.diag(U))
            diff = (ph[0] - ph[1]) % (2 * math.pi)
            worst_phase = max(worst_phase, abs(diff - math.pi / 2))
            tau = 2 * math.pi / abs(delta)
            a = phase_space_trajectory(2 * Om, delta, [tau / 2, tau])
            worst_alpha = max(worst_alpha, abs(a[1]) / abs(a[0]))
    return worst_phase, worst_alpha


def criterion_9(ctx: Context) -> Criterion:
    det, worst = [], 1.0
    for kind in ("zz", "phiphi"):
        sim = ctx.simulation(kind)
        block, full = sim.spin_propagator()
        f = ev.gate_fidelity(block, sim.target)
        ctx.norm_drifts.extend(np.abs(np.linalg.norm(full, axis=0) - 1))
        worst = min(worst, f)
        det.append(f"{kind}: process fidelity 1 - {1 - f:.2e} (n_max = {sim.spec.modes[0][1]}, tol {sim.tol:g})")
    dphi, alpha = _differential_phase_grid()
    det.append(f"differential phase error {dphi:.1e} rad, loop closure |alpha(tau)|/|alpha(tau/2)| {alpha:.1e}")
    ok = worst >= 1 - 1e-6 and dphi < 1e-10 and alpha < 1e-10
    return Criterion(9, "oracle equivalence", ok, f"min fidelity 1 - {1 - worst:.1e}",
                     "fidelity >= 1 - 1e-6, phase within 1e-10, closure < 1e-10", det)


def criterion_10(ctx: Context) -> Criterion:
    scan = ctx.cfg.evolve.fock_scan
    n_max = max(scan) + 15
    fids = ev.fock_independence_scan(ctx.simulation("zz", n_max), scan)
    spread = max(fids.values()) - min(fids.values())
    top = max(scan)
    f_hi = ev.fock_independence_scan(ctx.simulation("zz", n_max + 4), [top])[top]
    conv = abs(f_hi - fids[top])
    q0 = ctx.setup("phiphi").spec.q0
    anh = anharmonic_suppression(round(q0 * 1e10) / 1e10, ctx.cfg.geometry.d0)
    det = [f"n = {n}: 1 - F = {1 - f:.2e}" for n, f in fids.items()]
    det += [f"cutoff change n_max {n_max} -> {n_max + 4}: dF = {conv:.1e}",
            f"anharmonic suppression (q0 = {q0 * 1e9:.2f} nm, d0 = {ctx.cfg.geometry.d0 * 1e6:g} um): {anh:.4e}"]
    ok = spread < 1e-6 and conv < 1e-8 and abs(anh - PUBLISHED["anharmonic"]) < 0.05e-7
    return Criterion(10, "motional insensitivity", ok, f"Fock spread {spread:.1e}, suppression {anh:.3e}",
                     "spread < 1e-6, suppression ~1.2e-7", det)


def criterion_11(ctx: Context) -> Criterion:
    unit = 0.0
    for kind in ("zz", "phiphi"):
        U = ctx.setup(kind).report().propagator
        unit = max(unit, np.max(np.abs(U.conj().T @ U - np.eye(4))))
    for t in np.linspace(0, 1e-6, 7):
        U = carrier_rotation(ctx.carrier[1].Omega_x, 0.3, t)
        unit = max(unit, np.max(np.abs(U.conj().T @ U - np.eye(2))))

    ortho = 0.0
    for N in range(1, 9):
        cfg = ChainConfig(N, ctx.species.mass, ctx.cfg.chain.omega_axial, 2 * math.pi * 8e6, 2 * math.pi * 9e6)
        for axis in "xyz":
            b = normal_modes(cfg, axis).vectors
            ortho = max(ortho, np.max(np.abs(b @ b.T - np.eye(N))))

    jac = 0.0
    d = ctx.design
    d0 = d.d0
    conds = list(d.conductors) + [Conductor.wire("w", x=-0.3 * d0, z=0.4 * d0)]
    cur = {c.name: 1.0 + 0.1 * k for k, c in enumerate(conds)}
    for x in np.linspace(0.3, 2.0, 6) * d0:
        for z in np.linspace(-3, 3, 7) * d0:
            J = field_of_layout(conds, cur, (x, 0.0, z)).jacobian
            scale = np.max(np.abs(J))
            jac = max(jac, np.max(np.abs(J - J.T)) / scale, abs(np.trace(J)) / scale)

    if not ctx.norm_drifts:
        criterion_9(ctx)
    drift = max(ctx.norm_drifts)
    det = [f"unitarity {unit:.1e}", f"mode orthonormality (N = 1..8) {ortho:.1e}",
           f"Jacobian asymmetry/trace {jac:.1e}", f"norm drift {drift:.1e}"]
    ok = unit <= 1e-12 and ortho <= 1e-12 and jac <= 1e-8 and drift <= 1e-9
    return Criterion(11, "invariant suites", ok, ", ".join(det), "<= 1e-12, 1e-12, 1e-8, 1e-9", [])


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10, criterion_11]


def run_all(cfg: RunConfig, only=None) -> list[Criterion]:
    ctx = Context(cfg)
    out = []
    for k, fn in enumerate(CRITERIA, start=1):
        if only is None or k in only:
            out.append(fn(ctx))
    return out

