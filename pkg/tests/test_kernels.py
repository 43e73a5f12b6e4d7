import numpy as np
import pytest

from framelab import _kernels_py, kernels

try:
    from framelab import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

needs_ext = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("impl", [_kernels_py, pytest.param(compiled, marks=needs_ext)],
                         ids=["python", "cython"])
@pytest.mark.parametrize("d", [1, 2, 5, 16])
def test_jacobi_against_lapack(impl, d):
    rng = np.random.default_rng(d)
    b = rng.standard_normal((d, d))
    a = np.ascontiguousarray(b + b.T)
    w, v, sweeps = impl.jacobi_eigh(a.copy(), 1e-13, 100)
    assert sweeps <= 15  # quadratic convergence; 100 means the stop test never fired
    assert np.allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-10)
    assert np.allclose((v * w) @ v.T, a, atol=1e-10)


@needs_ext
def test_backends_agree():
    rng = np.random.default_rng(0)
    for d in (2, 3, 7):
        b = rng.standard_normal((d, d))
        a = np.ascontiguousarray(b + b.T)
        wc, _, _ = compiled.jacobi_eigh(a.copy(), 1e-13, 100)
        wp, _, _ = _kernels_py.jacobi_eigh(a.copy(), 1e-13, 100)
        assert np.allclose(np.sort(wc), np.sort(wp), atol=1e-12)
        x = rng.standard_normal((11, d))
        t = np.eye(d) / d
        oc, op = np.empty((d, d)), np.empty((d, d))
        sc = compiled.gram_deviation(x, t, 11.0, oc)
        sp = _kernels_py.gram_deviation(x, t, 11.0, op)
        assert sc == pytest.approx(sp, rel=1e-12) and np.allclose(oc, op, rtol=1e-12)
        im = rng.standard_normal((11, d))
        sc = compiled.hermitian_gram_deviation(x, im, t, 11.0, oc)
        sp = _kernels_py.hermitian_gram_deviation(x, im, t, 11.0, op)
        assert sc == pytest.approx(sp, rel=1e-12) and np.allclose(oc, op, rtol=1e-12)


@pytest.mark.parametrize("impl", [_kernels_py, pytest.param(compiled, marks=needs_ext)],
                         ids=["python", "cython"])
def test_gram_deviation_definition(impl):
    rng = np.random.default_rng(1)
    x = rng.standard_normal((6, 3))
    t = rng.standard_normal((3, 3))
    t = np.ascontiguousarray(t + t.T)
    out = np.empty((3, 3))
    total = impl.gram_deviation(x, t, 6.0, out)
    ref = (x.T @ x) / 6 - t
    assert np.allclose(out, ref**2) and total == pytest.approx(np.sum(ref**2))
    z = x + 1j * rng.standard_normal((6, 3))
    total = impl.hermitian_gram_deviation(np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag),
                                          t, 6.0, out)
    ref = (z.T @ z.conj()) / 6 - t
    assert np.allclose(out, np.abs(ref) ** 2) and total == pytest.approx(np.sum(np.abs(ref) ** 2))


def test_pure_python_switch():
    import subprocess
    import sys
    import os

    env = dict(os.environ, FRAMELAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from framelab import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
