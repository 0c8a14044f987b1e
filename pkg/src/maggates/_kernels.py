"""Hot numerical kernels with a numba path and a pure-numpy fallback.

Set ``MAGGATES_DISABLE_NUMBA=1`` (or any of ``1/true/yes``) before import to
force the numpy path; :func:`set_backend` switches at runtime.  Both paths
implement the same algorithms and are compared in ``tests/test_kernels.py``
and ``benchmarks/bench_kernels.py``.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

_DISABLED = os.environ.get("MAGGATES_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")
_backend = "numba" if (HAVE_NUMBA and not _DISABLED) else "numpy"

# integrator status codes
OK, MAX_STEPS, STEP_UNDERFLOW = 0, 1, 2

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


# ---------------------------------------------------------------------------
# Schrodinger right-hand side  d psi/dt = -i H(t) psi,
# H(t)[r, c] = sum_e amps[e] * exp(i freqs[fidx[e]] t) over entries e at (r, c)
# ---------------------------------------------------------------------------

def _rk_step_control(err, h, order=5):
    if err == 0.0:
        return 5.0
    fac = 0.9 * err ** (-1.0 / order)
    return min(5.0, max(0.2, fac))


def _dopri_numpy(rows, cols, amps, fidx, freqs, psi0, t0, t1, rtol, atol, h0, max_steps):
    # group entries by frequency into dense matrices: H(t) = sum_f exp(i nu_f t) M_f
    d = psi0.shape[0]
    mats = np.zeros((freqs.size, d, d), dtype=np.complex128)
    np.add.at(mats, (fidx, rows, cols), amps)

    def rhs(t, y):
        ph = np.exp(1j * freqs * t)
        H = np.tensordot(ph, mats, axes=1)
        return -1j * (H @ y)

    y = psi0.astype(np.complex128).copy()
    t = t0
    direction = 1.0 if t1 >= t0 else -1.0
    h = abs(h0) if h0 != 0 else abs(t1 - t0) / 100.0
    h_min = 1e-14 * max(abs(t0), abs(t1), 1e-300)
    k = np.empty((7,) + y.shape, dtype=np.complex128)
    k[0] = rhs(t, y)
    nsteps = 0
    while direction * (t1 - t) > 0:
        if nsteps >= max_steps:
            return y, t, h, nsteps, MAX_STEPS
        if h < h_min:
            return y, t, h, nsteps, STEP_UNDERFLOW
        h_try = min(h, abs(t1 - t))
        hs = direction * h_try
        for s in range(1, 7):
            ys = y + hs * np.tensordot(_A[s, :s], k[:s], axes=1)
            k[s] = rhs(t + _C[s] * hs, ys)
        y_new = y + hs * np.tensordot(_B5[:6], k[:6], axes=1)
        err_vec = hs * np.tensordot(_E, k, axes=1)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.sqrt(np.mean(np.abs(err_vec / scale) ** 2))
        nsteps += 1
        if err <= 1.0:
            t = t1 if h_try == abs(t1 - t) else t + hs
            y = y_new
            k[0] = k[6]
            h = h_try * _rk_step_control(err, h_try)
        else:
            h = h_try * max(0.2, 0.9 * err ** (-0.2))
    return y, t, h, nsteps, OK


if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _apply_h(rows, cols, amps, fidx, ph, y, out):
        out[:, :] = 0.0
        m = y.shape[1]
        for e in range(rows.size):
            a = amps[e] * ph[fidx[e]]
            r = rows[e]
            c = cols[e]
            for j in range(m):
                out[r, j] += a * y[c, j]
        for i in range(out.shape[0]):
            for j in range(m):
                out[i, j] = -1j * out[i, j]

    @numba.njit(cache=True)
    def _dopri_numba(rows, cols, amps, fidx, freqs, psi0, t0, t1, rtol, atol, h0, max_steps, A, B5, E, C):
        d, m = psi0.shape
        y = psi0.copy()
        y_new = np.empty_like(y)
        ys = np.empty_like(y)
        k = np.empty((7, d, m), dtype=np.complex128)
        ph = np.empty(freqs.size, dtype=np.complex128)
        t = t0
        direction = 1.0 if t1 >= t0 else -1.0
        h = abs(h0) if h0 != 0 else abs(t1 - t0) / 100.0
        h_min = 1e-14 * max(abs(t0), abs(t1), 1e-300)
        for f in range(freqs.size):
            ph[f] = np.exp(1j * freqs[f] * t)
        _apply_h(rows, cols, amps, fidx, ph, y, k[0])
        nsteps = 0
        n_el = d * m
        while direction * (t1 - t) > 0:
            if nsteps >= max_steps:
                return y, t, h, nsteps, 1
            if h < h_min:
                return y, t, h, nsteps, 2
            h_try = min(h, abs(t1 - t))
            hs = direction * h_try
            for s in range(1, 7):
                for i in range(d):
                    for j in range(m):
                        acc = y[i, j]
                        for q in range(s):
                            acc += hs * A[s, q] * k[q, i, j]
                        ys[i, j] = acc
                ts = t + C[s] * hs
                for f in range(freqs.size):
                    ph[f] = np.exp(1j * freqs[f] * ts)
                _apply_h(rows, cols, amps, fidx, ph, ys, k[s])
            err2 = 0.0
            for i in range(d):
                for j in range(m):
                    acc = y[i, j]
                    ev = 0.0 + 0.0j
                    for q in range(7):
                        acc += hs * B5[q] * k[q, i, j]
                        ev += hs * E[q] * k[q, i, j]
                    y_new[i, j] = acc
                    sc = atol + rtol * max(abs(y[i, j]), abs(acc))
                    r = abs(ev) / sc
                    err2 += r * r
            err = np.sqrt(err2 / n_el)
            nsteps += 1
            if err <= 1.0:
                if h_try == abs(t1 - t):
                    t = t1
                else:
                    t = t + hs
                y[:, :] = y_new
                k[0] = k[6]
                if err == 0.0:
                    fac = 5.0
                else:
                    fac = min(5.0, max(0.2, 0.9 * err ** (-0.2)))
                h = h_try * fac
            else:
                h = h_try * max(0.2, 0.9 * err ** (-0.2))
        return y, t, h, nsteps, 0


def dopri_propagate(rows, cols, amps, fidx, freqs, psi0, t0, t1, rtol=1e-10, atol=1e-12, h0=0.0, max_steps=10_000_000):
    """Adaptive Dormand-Prince 5(4) integration of ``d psi/dt = -i H(t) psi``.

    ``psi0`` may be a vector or a (dim, ncols) block of columns.  Returns
    ``(psi, t_reached, h_last, nsteps, status)``.
    """
    psi = np.asarray(psi0, dtype=np.complex128)
    vec = psi.ndim == 1
    if vec:
        psi = psi[:, None]
    args = (
        np.ascontiguousarray(rows, dtype=np.int64),
        np.ascontiguousarray(cols, dtype=np.int64),
        np.ascontiguousarray(amps, dtype=np.complex128),
        np.ascontiguousarray(fidx, dtype=np.int64),
        np.ascontiguousarray(freqs, dtype=np.float64),
        np.ascontiguousarray(psi),
        float(t0), float(t1), float(rtol), float(atol), float(h0), int(max_steps),
    )
    if _backend == "numba":
        y, t, h, n, status = _dopri_numba(*args, _A, _B5, _E, _C)
    else:
        y, t, h, n, status = _dopri_numpy(*args)
    return (y[:, 0] if vec else y), t, h, n, status


# ---------------------------------------------------------------------------
# 2D magnetostatics on a grid: conductors along y, uniform current over
# z in [z1, z2] in the plane x = x0 (z1 == z2 means a thin wire)
# ---------------------------------------------------------------------------

def _strip_grid_numpy(x0, z1, z2, k, X, Z):
    Bx = np.zeros_like(X)
    Bz = np.zeros_like(X)
    dBx_dx = np.zeros_like(X)
    dBx_dz = np.zeros_like(X)
    for c in range(x0.size):
        dx = X - x0[c]
        if z2[c] == z1[c]:
            dz = Z - z1[c]
            r2 = dx * dx + dz * dz
            Bx += k[c] * dz / r2
            Bz += -k[c] * dx / r2
            dBx_dx += -2 * k[c] * dx * dz / r2**2
            dBx_dz += k[c] * (dx * dx - dz * dz) / r2**2
        else:
            kw = k[c] / (z2[c] - z1[c])
            u1, u2 = Z - z1[c], Z - z2[c]
            r1, r2 = u1 * u1 + dx * dx, u2 * u2 + dx * dx
            theta = np.arctan2(dx * (z2[c] - z1[c]), dx * dx + u1 * u2)
            Bx += 0.5 * kw * np.log(r1 / r2)
            Bz += -kw * theta
            dBx_dx += kw * (dx / r1 - dx / r2)
            dBx_dz += kw * (u1 / r1 - u2 / r2)
    return Bx, Bz, dBx_dx, dBx_dz


if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _strip_grid_numba(x0, z1, z2, k, X, Z):
        n = X.size
        xf = X.ravel()
        zf = Z.ravel()
        Bx = np.zeros(n)
        Bz = np.zeros(n)
        dBx_dx = np.zeros(n)
        dBx_dz = np.zeros(n)
        for p in range(n):
            for c in range(x0.size):
                dx = xf[p] - x0[c]
                if z2[c] == z1[c]:
                    dz = zf[p] - z1[c]
                    r2 = dx * dx + dz * dz
                    Bx[p] += k[c] * dz / r2
                    Bz[p] += -k[c] * dx / r2
                    dBx_dx[p] += -2 * k[c] * dx * dz / (r2 * r2)
                    dBx_dz[p] += k[c] * (dx * dx - dz * dz) / (r2 * r2)
                else:
                    kw = k[c] / (z2[c] - z1[c])
                    u1 = zf[p] - z1[c]
                    u2 = zf[p] - z2[c]
                    r1 = u1 * u1 + dx * dx
                    r2 = u2 * u2 + dx * dx
                    theta = np.arctan2(dx * (z2[c] - z1[c]), dx * dx + u1 * u2)
                    Bx[p] += 0.5 * kw * np.log(r1 / r2)
                    Bz[p] += -kw * theta
                    dBx_dx[p] += kw * (dx / r1 - dx / r2)
                    dBx_dz[p] += kw * (u1 / r1 - u2 / r2)
        s = X.shape
        return Bx.reshape(s), Bz.reshape(s), dBx_dx.reshape(s), dBx_dz.reshape(s)


def strip_field_grid(x0, z1, z2, k, X, Z):
    """Bx, Bz, dBx/dx, dBx/dz of y-aligned strips/wires on a point grid.

    ``k`` is mu0 I / (2 pi) per conductor (sign includes the current
    direction).  The remaining derivatives follow from the 2D curl- and
    divergence-free conditions: dBz/dx = dBx/dz, dBz/dz = -dBx/dx.
    """
    arrs = [np.ascontiguousarray(a, dtype=np.float64) for a in (x0, z1, z2, k)]
    X = np.ascontiguousarray(X, dtype=np.float64)
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    if _backend == "numba":
        return _strip_grid_numba(*arrs, X, Z)
    return _strip_grid_numpy(*arrs, X, Z)
