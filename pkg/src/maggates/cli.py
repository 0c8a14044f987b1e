"""Command-line front end.

    maggates <subcommand> [--config run.toml] [--out DIR] [--format table|csv] [--seedless]

Exit codes: 0 success, 1 configuration error, 2 numerical non-convergence,
3 acceptance failure (``reproduce`` only).
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io
import math
import random
import sys
from pathlib import Path

import numpy as np

from . import evolve as ev
from .atomic import LevelTrackingError, NoStationaryPointError, breit_rabi_levels
from .chain import ChainConfig, ChainConvergenceError, ChainInstabilityError, normal_modes, two_ion_gate_chain
from .config import ConfigError, RunConfig, load_config
from .constants import CONSTANTS
from .fields import Conductor, FitError, NullSolveError, SingularityError, field_map
from .reproduce import PUBLISHED, Context, run_all
from .tables import fmt_value, format_table, write_csv

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 1, 2, 3

CONVENTIONS = (
    "# conventions: hbar = 1 inside Hamiltonians, frequencies in rad/s unless labelled Hz",
    "# pi pulse: t_pi = pi / (2 Omega_x), Omega_x = B_x |<down|mu_x|up>| / (2 hbar)",
    "# mu_eff = (mu_z(up) - mu_z(down)) / 2, Omega_z = B_z mu_eff / (2 hbar)",
    "# single-qubit phases: theta in U = exp(-i theta sigma_z)",
)

_NUMERIC_ERRORS = (LevelTrackingError, NoStationaryPointError, ChainConvergenceError, ChainInstabilityError,
                   FitError, NullSolveError, SingularityError, ev.IntegrationError, ev.FockCutoffError)


class _Output:
    def __init__(self, out: Path | None, fmt: str, stream):
        self.out, self.fmt, self.stream = out, fmt, stream

    def say(self, text: str = "") -> None:
        print(text, file=self.stream)

    def table(self, name: str, header, rows) -> None:
        if self.out is not None:
            write_csv(self.out / f"{name}.csv", header, rows)
        if self.fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(header)
            w.writerows([[fmt_value(v) for v in r] for r in rows])
            self.say(buf.getvalue().rstrip("\n"))
        else:
            self.say(format_table(header, rows))


def _ket(label) -> str:
    return f"|{label[0]:g},{label[1]:g}>"


def _moment_header(ctx: Context, out: _Output) -> None:
    for line in CONVENTIONS:
        out.say(line)
    p = ctx.setup("zz").pair
    mb = CONSTANTS.muB
    out.say(f"# moments at B0 = {p.B0 * 1e3:.4f} mT: mu_z(2,2) = {p.mu_z_up / mb:+.6f} muB, "
            f"mu_z(2,0) = {p.mu_z_down / mb:+.6f} muB, mu_eff = {p.mu_eff / mb:+.6f} muB")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_levels(ctx: Context, out: _Output) -> int:
    c = ctx.cfg.levels
    rows = []
    for B in np.linspace(c.B_min, c.B_max, c.n):
        for lv in breit_rabi_levels(ctx.species, float(B)):
            rows.append([float(B) * 1e3, lv.F, lv.mF, lv.energy])
    out.say(f"# Breit-Rabi levels of {ctx.species.name}; energies in Hz relative to the fine-structure centre")
    out.table("levels", ["B_mT", "F", "mF", "energy_Hz"], rows)
    return EXIT_OK


def cmd_clockpoint(ctx: Context, out: _Output) -> int:
    sp = ctx.clock
    q = ctx.cfg.qubit
    out.say(f"# field-independent point of {q.up} <-> {q.down} in {ctx.species.name}")
    out.table("clockpoint", ["quantity", "value", "unit"], [
        ["B0", sp.B * 1e3, "mT"],
        ["omega0_over_2pi", sp.omega0 / (2 * math.pi), "Hz"],
        ["slope_over_2pi", sp.slope / (2 * math.pi) * 1e-3, "Hz/mT"],
        ["curvature_over_2pi", sp.curvature / (2 * math.pi), "Hz/T^2"],
    ])
    return EXIT_OK


def _layout(ctx: Context):
    g, f = ctx.cfg.geometry, ctx.cfg.fields
    if g.layout == "custom":
        conds = [Conductor(c.name, c.kind, c.z1, c.z2, c.x) for c in g.conductors]
        return conds, {c.name: c.current * f.current for c in g.conductors}
    d = ctx.design
    if f.drive == "layout":
        raise ConfigError("[fields] drive = 'layout' needs a custom geometry")
    cur = d.gradient_currents if f.drive == "gradient" else d.rotation_currents
    return list(d.conductors), cur.scaled(f.current)


def cmd_fields(ctx: Context, out: _Output) -> int:
    f = ctx.cfg.fields
    conds, cur = _layout(ctx)
    xs = np.linspace(f.x_min, f.x_max, f.nx)
    zs = np.linspace(f.z_min, f.z_max, f.nz)
    m = field_map(conds, cur, xs, zs)
    rows = []
    for i, x in enumerate(xs):
        for k, z in enumerate(zs):
            rows.append([x * 1e6, z * 1e6, m["Bx"][i, k], m["Bz"][i, k], m["dBx_dz"][i, k], m["dBz_dx"][i, k]])
    out.say(f"# field map, drive '{f.drive}' at {f.current:g} A; fields in T, gradients in T/m")
    out.table("fields", ["x_um", "z_um", "Bx_T", "Bz_T", "dBx_dz_T_per_m", "dBz_dx_T_per_m"], rows)
    return EXIT_OK


def cmd_design(ctx: Context, out: _Output) -> int:
    d = ctx.design
    for n in d.notes:
        out.say(f"# {n}")
    rows = [[c.name, c.kind, c.z1 * 1e6, c.z2 * 1e6, d.gradient_currents[c.name]] for c in d.conductors]
    out.table("design_conductors", ["name", "kind", "z1_um", "z2_um", "gradient_current_per_A"], rows)
    out.table("design", ["quantity", "value", "target", "unit"], [
        ["Bx_per_A_times_d0", d.bx_per_amp * d.d0, 1.5e-7, "T m/A"],
        ["gradient_per_A_times_d0^2", d.gradient_per_amp * d.d0**2, 2.5e-7, "T m/A"],
        ["side_ratio", d.side_ratio, -2.5, "1"],
        ["null_relative", d.null_relative, 0.0, "1"],
    ])
    return EXIT_OK


def chain_config(cfg: RunConfig, mass: float, axis: str) -> ChainConfig:
    ch = cfg.chain
    if ch.omega_x is not None and ch.omega_z is not None:
        return ChainConfig(ch.N, mass, ch.omega_axial, ch.omega_x, ch.omega_z)
    if ch.N != 2:
        raise ConfigError("[chain] radial_x and radial_z are required unless N = 2")
    return two_ion_gate_chain(mass, ch.mode_frequency, axis, ch.mode_kind, ch.omega_axial)


def cmd_modes(ctx: Context, out: _Output) -> int:
    g = ctx.cfg.gate
    axis = g.mode_axis or ("x" if g.kind == "zz" else "z")
    cfg = chain_config(ctx.cfg, ctx.species.mass, axis)
    rows = []
    for ax in "xyz":
        m = normal_modes(cfg, ax)
        for j in range(m.n_modes):
            rows.append([ax, j, m.frequencies[j] / (2 * math.pi), m.q0[j] * 1e9]
                        + [float(b) for b in m.vectors[j]])
    out.say(f"# {cfg.N}-ion chain; positions (um): {', '.join(f'{p * 1e6:.4f}' for p in m.positions)}")
    out.table("modes", ["axis", "j", "freq_Hz", "q0_nm"] + [f"b_{n}" for n in range(cfg.N)], rows)
    return EXIT_OK


def cmd_gate(ctx: Context, out: _Output) -> int:
    kind = ctx.cfg.gate.kind
    s = ctx.setup(kind)
    rep = s.report()
    _moment_header(ctx, out)
    published = PUBLISHED["I_phiphi"] if kind == "phiphi" else PUBLISHED["I_zz"]
    out.say(f"# {kind} gate: required current {s.current:.4f} A (published figure {published} A)")
    for n in rep.notes:
        out.say(f"# {n}")
    rows = [
        ["pair_up", _ket(s.pair.up.label), ""],
        ["pair_down", _ket(s.pair.down.label), ""],
        ["B0", s.pair.B0 * 1e3, "mT"],
        ["mode_axis", s.spec.mode_axis, ""],
        ["mode_frequency", s.spec.mode_frequency / (2 * math.pi), "Hz"],
        ["q0", s.spec.q0 * 1e9, "nm"],
        ["current", s.current, "A"],
        ["current_published", published, "A"],
        ["delta_over_2pi", s.spec.delta / (2 * math.pi), "Hz"],
        ["tau", s.spec.tau * 1e6, "us"],
    ]
    rows += [[f"coupling_ion{n}", float(c), "rad/s"] for n, c in enumerate(rep.couplings)]
    rows += [[f"phase_{lab}", float(p), "rad"] for lab, p in zip(rep.basis_labels, rep.phases)]
    rows += [[f"alpha_max_{k}", v, "1"] for k, v in rep.alpha_max.items()]
    out.table("gate", ["quantity", "value", "unit"], rows)
    if out.out is not None:
        hdr = ["t_us"] + [f"{p}_{k}" for k in rep.trajectories for p in ("re", "im")]
        trows = [[t * 1e6] + [float(getattr(rep.trajectories[k][i], p)) for k in rep.trajectories for p in ("real", "imag")]
                 for i, t in enumerate(rep.times)]
        write_csv(out.out / "gate_trajectories.csv", hdr, trows)
    return EXIT_OK


def cmd_errors(ctx: Context, out: _Output) -> int:
    kind = ctx.cfg.gate.kind
    s = ctx.setup(kind)
    b = s.report(displacement=ctx.cfg.errors.displacement).budget
    _moment_header(ctx, out)
    for n in b.notes:
        out.say(f"# {n}")
    rows = [[ln.mechanism, ln.tone, ln.phase] for ln in b.lines]
    rows.append(["total", "all", b.total_phase])
    out.table("errors", ["mechanism", "tone", "theta_rad"], rows)
    extra = [["residual_Bx", b.residual_field[0], "T"], ["residual_By", b.residual_field[1], "T"],
             ["residual_Bz", b.residual_field[2], "T"], ["anharmonic_suppression", b.anharmonic_suppression, "1"]]
    if b.electric_equivalence is not None:
        extra += [["electric_equivalence", b.electric_equivalence * 1e6, "uV"],
                  ["electric_equivalence_mu_eff", b.electric_equivalence_mu_eff * 1e6, "uV"]]
    out.table("errors_summary", ["quantity", "value", "unit"], extra)
    return EXIT_OK


def cmd_evolve(ctx: Context, out: _Output) -> int:
    e = ctx.cfg.evolve
    kind = ctx.cfg.gate.kind
    sim = ctx.simulation(kind)
    block, full = sim.spin_propagator()
    fid = ev.gate_fidelity(block, sim.target)
    spec = sim.spec
    psi0 = np.zeros(spec.dim, dtype=complex)
    psi0[spec.index((1, 1), (0,))] = 1.0  # |down, down, n = 0>
    times = np.linspace(0.0, sim.t_final, e.samples)
    run = ev.integrate(sim.tones, sim.rabi, sim.flags, spec, psi0, sim.t_final, sim.tol, t_eval=times)
    purity = ev.motional_purity(run.state.psi, spec)
    drift = float(np.max(np.abs(np.linalg.norm(full, axis=0) - 1)))
    scan = ev.fock_independence_scan(sim, e.fock_scan) if max(e.fock_scan) + 4 <= spec.modes[0][1] else {}
    out.say(f"# {kind} oracle: flags {sim.flags}, n_max = {spec.modes[0][1]}, tol = {sim.tol:g}")
    rows = [["process_fidelity", fid], ["infidelity", 1 - fid], ["motional_purity", purity], ["norm_drift", drift],
            ["steps", run.nsteps]]
    rows += [[f"fidelity_n{n}", f] for n, f in scan.items()]
    out.table("evolve", ["quantity", "value"], rows)
    if out.out is not None:
        watch = [spec.index(s, (0,)) for s in ((0, 0), (0, 1), (1, 0), (1, 1))]
        hdr, trows = ev.trajectory_rows(run, spec, watch)
        write_csv(out.out / "evolve_trajectory.csv", hdr, trows)
        ev.write_state(out.out / "evolve_state.txt", run.state, spec)
    return EXIT_OK


def cmd_reproduce(ctx: Context, out: _Output) -> int:
    _moment_header(ctx, out)
    results = run_all(ctx.cfg)
    for c in results:
        out.say(c.line())
        for d in c.details:
            out.say(f"      {d}")
    if out.out is not None:
        write_csv(out.out / "reproduce.csv", ["criterion", "title", "passed", "measured", "target"],
                  [[c.number, c.title, c.passed, c.measured, c.target] for c in results])
    n_fail = sum(not c.passed for c in results)
    out.say(f"{len(results) - n_fail}/{len(results)} criteria passed")
    return EXIT_ACCEPTANCE if n_fail else EXIT_OK


COMMANDS = {
    "levels": cmd_levels, "clockpoint": cmd_clockpoint, "fields": cmd_fields, "design": cmd_design,
    "modes": cmd_modes, "gate": cmd_gate, "errors": cmd_errors, "evolve": cmd_evolve, "reproduce": cmd_reproduce,
}


@contextlib.contextmanager
def no_rng():
    """Make every common random-number entry point raise while active."""

    def forbidden(*_a, **_k):
        raise RuntimeError("random number generation attempted under --seedless")

    targets = [(np.random, n) for n in ("default_rng", "seed", "rand", "randn", "random", "normal", "uniform",
                                         "randint", "choice", "RandomState")]
    targets += [(random, n) for n in ("random", "seed", "uniform", "gauss", "randint", "choice", "shuffle")]
    saved = [(mod, n, getattr(mod, n)) for mod, n in targets]
    try:
        for mod, n, _ in saved:
            setattr(mod, n, forbidden)
        yield
    finally:
        for mod, n, f in saved:
            setattr(mod, n, f)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="maggates", description="Magnetic-gradient trapped-ion gate calculations.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, default=None, help="run configuration (TOML); default: shipped config")
    p.add_argument("--out", type=Path, default=None, help="directory for CSV artefacts")
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--seedless", action="store_true", help="fail if anything draws random numbers")
    return p


def main(argv=None, stream=None) -> int:
    args = build_parser().parse_args(argv)
    stream = stream or sys.stdout
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = _Output(args.out, args.format, stream)
    guard = no_rng() if args.seedless else contextlib.nullcontext()
    try:
        with guard:
            return COMMANDS[args.command](Context(cfg), out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
