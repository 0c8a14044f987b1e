"""Time the numba kernels against the pure-numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call (JIT compilation) is timed separately and excluded from
the steady-state numbers.  Results from both backends are compared as well.
"""
import argparse
import math
import time

import numpy as np

from maggates import _kernels
from maggates import evolve as ev
from maggates.fields import design_five_wire, field_map
from maggates.scenarios import build_gate_setup


def _gate_problem():
    setup = build_gate_setup("phiphi", design=design_five_wire(30e-6))
    sim = ev.gate_simulation(setup, n_max=12)
    terms = ev.build_terms(sim.tones, sim.rabi, sim.flags, sim.spec)
    psi0 = np.zeros(sim.spec.dim, complex)
    psi0[sim.spec.index((1, 1), (0,))] = 1.0
    args = (terms.rows, terms.cols, terms.amps, terms.fidx, terms.freqs, psi0, 0.0, sim.t_final)
    return f"dopri_propagate, phiphi gate, dim {sim.spec.dim}, {len(terms.rows)} terms", \
        lambda: _kernels.dopri_propagate(*args)[0]


def _grid_problem(n=200):
    d = design_five_wire(30e-6)
    xs = np.linspace(5e-6, 80e-6, n)
    zs = np.linspace(-80e-6, 80e-6, n)
    return f"strip_field_grid via field_map, {len(d.conductors)} conductors, {n}x{n} grid", \
        lambda: np.stack(list(field_map(d.conductors, d.gradient_currents, xs, zs).values()))


def _time(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    old = _kernels.backend()
    try:
        for name, fn in (_grid_problem(), _gate_problem()):
            _kernels.set_backend("numba")
            t = time.perf_counter()
            fn()
            jit = time.perf_counter() - t
            t_nb, y_nb = _time(fn, args.repeat)
            _kernels.set_backend("numpy")
            t_np, y_np = _time(fn, max(1, args.repeat // 2))
            diff = np.max(np.abs(y_nb - y_np)) / max(np.max(np.abs(y_np)), 1e-300)
            print(name)
            print(f"  numba  {t_nb * 1e3:10.2f} ms   (first call incl. compile {jit:.2f} s)")
            print(f"  numpy  {t_np * 1e3:10.2f} ms")
            print(f"  speedup {t_np / t_nb:8.1f}x   max rel. difference {diff:.1e}")
    finally:
        _kernels.set_backend(old)


if __name__ == "__main__":
    main()
