"""numba and numpy kernels must agree."""
import math

import numpy as np
import pytest

from maggates import _kernels
from maggates import evolve as ev
from maggates.fields import DriveTone
from maggates.gates import RabiSet

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def numpy_backend():
    old = _kernels.backend()
    _kernels.set_backend("numpy")
    yield
    _kernels.set_backend(old)


def _terms():
    spec = ev.HilbertSpec(2, ((2 * math.pi * 5e6, 6),))
    rabi = RabiSet(2e4, 5e3, np.array([[4e4, -4e4]]), np.array([[1e4, -1e4]]), 2 * math.pi * 1e8,
                   np.array([2 * math.pi * 5e6]))
    tones = [DriveTone(2 * math.pi * 1.05e8, 0.2), DriveTone(2 * math.pi * 0.95e8, -0.4)]
    return spec, ev.build_terms(tones, rabi, ev.TermFlags(), spec)


def _propagate(terms, psi0):
    return _kernels.dopri_propagate(terms.rows, terms.cols, terms.amps, terms.fidx, terms.freqs, psi0, 0.0, 5e-6)


def test_dopri_backends_agree(numpy_backend):
    spec, terms = _terms()
    psi0 = np.eye(spec.dim, dtype=complex)[:, :5]
    y_np, t_np, _, n_np, s_np = _propagate(terms, psi0)
    _kernels.set_backend("numba")
    y_nb, t_nb, _, n_nb, s_nb = _propagate(terms, psi0)
    assert s_np == s_nb == _kernels.OK
    assert t_np == t_nb == 5e-6
    assert n_np == n_nb
    assert np.max(np.abs(y_np - y_nb)) < 1e-12


def test_dopri_vector_input_and_status():
    spec, terms = _terms()
    psi = np.zeros(spec.dim, complex)
    psi[0] = 1
    y, t, h, n, status = _propagate(terms, psi)
    assert y.shape == (spec.dim,) and status == _kernels.OK and n > 0
    *_, status = _kernels.dopri_propagate(terms.rows, terms.cols, terms.amps, terms.fidx, terms.freqs, psi,
                                          0.0, 5e-6, max_steps=2)
    assert status == _kernels.MAX_STEPS


def test_strip_grid_backends_agree(numpy_backend):
    x0 = np.array([0.0, 0.0, -5e-6])
    z1 = np.array([-1e-5, 2e-5, 1e-5])
    z2 = np.array([1e-5, 6e-5, 1e-5])  # last one is a wire
    k = np.array([2e-7, -5e-7, 1e-7])
    X, Z = np.meshgrid(np.linspace(3e-6, 5e-5, 13), np.linspace(-4e-5, 4e-5, 11), indexing="ij")
    a = _kernels.strip_field_grid(x0, z1, z2, k, X, Z)
    _kernels.set_backend("numba")
    b = _kernels.strip_field_grid(x0, z1, z2, k, X, Z)
    for u, v in zip(a, b):
        assert np.allclose(u, v, rtol=1e-13, atol=0)


def test_set_backend_validation():
    with pytest.raises(ValueError):
        _kernels.set_backend("cuda")
