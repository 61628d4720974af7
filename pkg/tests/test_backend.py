import os
import subprocess
import sys

import numpy as np
import pytest

from symmes import kernels
from symmes._backend import HAVE_NUMBA
from symmes.symcheck import P_SYM2, SINGLET, PairMapSpec
from symmes.symspace import haar_unitary2

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@needs_numba
@pytest.mark.parametrize("n", [1, 4, 13])
def test_irrep_backends_agree(n):
    us = haar_unitary2(n, size=5)
    a = kernels.irrep_batch_numba(us, n)
    b = kernels.irrep_batch_numpy(us, n)
    assert np.allclose(a, b, atol=1e-13)
    assert np.allclose(kernels.irrep_numba(us[0], n), kernels.irrep_numpy(us[0], n), atol=1e-13)


@needs_numba
@pytest.mark.parametrize("n,qi,qj", [(2, 0, 1), (4, 3, 0), (5, 1, 3)])
@pytest.mark.parametrize("variant", ["formula", "prose"])
def test_pair_kernel_backends_agree(n, qi, qj, variant, rng):
    tail = PairMapSpec(max(n, 2), variant=variant).tail
    x = rng.standard_normal((1 << n, 1 << n))
    a = np.zeros_like(x)
    b = np.zeros_like(x)
    kernels.pair_map_accumulate_numba(x, a, n, qi, qj, P_SYM2, SINGLET, tail, 0.5)
    kernels.pair_map_accumulate_numpy(x, b, n, qi, qj, P_SYM2, SINGLET, tail, 0.5)
    assert np.allclose(a, b, atol=1e-14)


def test_binomial_table():
    t = kernels.binomial_table(5)
    assert t[5, 2] == 10 and t[4, 0] == 1


def _backend_in_subprocess(value):
    env = dict(os.environ, SYMMES_BACKEND=value)
    code = "import symmes; print(symmes.BACKEND)"
    return subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)


def test_env_flag_selects_numpy():
    out = _backend_in_subprocess("numpy")
    assert out.returncode == 0 and out.stdout.strip() == "numpy"


def test_env_flag_rejects_unknown():
    out = _backend_in_subprocess("fortran")
    assert out.returncode != 0 and "SYMMES_BACKEND" in out.stderr
