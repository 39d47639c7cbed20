import os
import subprocess
import sys

import numpy as np
import pytest
import scipy.sparse as sp

from fracpow import fem, kernels

compiled = pytest.mark.skipif(kernels.BACKEND != "cython", reason="extension not built")


def _system(n=12, shift=0.3):
    pair = fem.assemble(fem.build_mesh(n))
    indptr, indices, data = pair.combination(1.0, shift)
    rhs = np.random.default_rng(0).standard_normal(pair.ndof)
    inv_diag = 1.0 / sp.csr_matrix((data, indices, indptr)).diagonal()
    return indptr, indices, data, rhs, inv_diag


@pytest.mark.parametrize("backend", ["python", pytest.param("cython", marks=compiled)])
def test_pcg_solves(backend):
    indptr, indices, data, rhs, inv_diag = _system()
    x, it, relres, ok = kernels.pcg_csr(indptr, indices, data, rhs, inv_diag, 1e-12, 1000,
                                        backend=backend)
    A = sp.csr_matrix((data, indices, indptr))
    assert ok and relres <= 1e-12
    assert np.linalg.norm(A @ x - rhs) <= 1.01e-12 * np.linalg.norm(rhs)
    assert it > 0


@pytest.mark.parametrize("backend", ["python", pytest.param("cython", marks=compiled)])
def test_pcg_zero_rhs(backend):
    indptr, indices, data, rhs, inv_diag = _system()
    x, it, relres, ok = kernels.pcg_csr(indptr, indices, data, 0 * rhs, inv_diag, 1e-12, 10,
                                        backend=backend)
    assert ok and it == 0 and np.all(x == 0)


@pytest.mark.parametrize("backend", ["python", pytest.param("cython", marks=compiled)])
def test_pcg_reports_nonconvergence(backend):
    indptr, indices, data, rhs, inv_diag = _system(shift=50.0)
    _, it, relres, ok = kernels.pcg_csr(indptr, indices, data, rhs, inv_diag, 1e-12, 2,
                                        backend=backend)
    assert not ok and it == 2 and relres > 1e-12


@compiled
def test_backends_agree():
    args = _system()
    xp, itp, _, _ = kernels.pcg_csr(*args, 1e-12, 1000, backend="python")
    xc, itc, _, _ = kernels.pcg_csr(*args, 1e-12, 1000, backend="cython")
    assert abs(itp - itc) <= 1
    np.testing.assert_allclose(xc, xp, rtol=1e-10, atol=1e-12)

    rng = np.random.default_rng(2)
    w, shift, scale = rng.random(50), rng.random(50), rng.random(50)
    lam = np.geomspace(1e-3, 1e12, 300)
    np.testing.assert_allclose(kernels.resolvent_sum(w, shift, scale, lam, backend="cython"),
                               kernels.resolvent_sum(w, shift, scale, lam, backend="python"),
                               rtol=1e-13)


def test_resolvent_sum_direct():
    w = np.array([1.0, 2.0])
    shift = np.array([1.0, 0.5])
    scale = np.array([2.0, 1.0])
    out = kernels.resolvent_sum(w, shift, scale, [3.0])
    assert out[0] == pytest.approx(1 / 7 + 2 / 3.5)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.resolvent_sum([1.0], [1.0], [1.0], [1.0], backend="fortran")


def test_pure_python_switch():
    env = dict(os.environ, FRACPOW_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import fracpow; print(fracpow.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
