import os
import subprocess
import sys

import numpy as np
import pytest

from spiked_rmt import kernels
from spiked_rmt._accel import NUMBA_ENABLED, python_version
from spiked_rmt.finite import _basis
from spiked_rmt.phase import Potential, solve_equilibrium
from spiked_rmt.quadrature import composite_gauss_legendre
from spiked_rmt.sampler import _spike_shift


def stieltjes_inputs(degree=25):
    rule = composite_gauss_legendre(np.linspace(-3.0, 3.0, 61), 20)
    return rule.nodes, rule.weights * np.exp(-degree * rule.nodes**2 / 2), degree


def mcmc_inputs(n=12, sweeps=300, seed=0):
    pot = Potential.gaussian()
    eq = solve_equilibrium(pot)
    basis = _basis(pot, float(n), n)
    rng = np.random.default_rng(seed)
    lam0 = eq.radius * np.cos(np.pi * (np.arange(n) + 0.5) / n)
    return (
        lam0, eq.radius / n, rng.standard_normal((sweeps, n)), rng.random((sweeps, n)),
        basis.a, basis.b, basis.mu0, np.asarray(pot.coef, dtype=float), float(n),
        np.array([1.8]), np.array([_spike_shift(pot, n, 1.8)]), sweeps // 2, 1, 0.3,
    )


def test_stieltjes_parity():
    args = stieltjes_inputs()
    fast = kernels.stieltjes(*args)
    slow = python_version(kernels.stieltjes)(*args)
    for x, y in zip(fast, slow):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-14)


def test_mcmc_parity():
    args = mcmc_inputs()
    fast = kernels.mcmc_chain(*args)
    slow = python_version(kernels.mcmc_chain)(*args)
    np.testing.assert_allclose(fast[0], slow[0], rtol=1e-9, atol=1e-12)
    assert fast[1] == pytest.approx(slow[1])


def test_python_version_is_identity_on_plain_functions():
    assert python_version(np.sum) is np.sum


def test_disable_flag():
    env = dict(os.environ, SPIKED_RMT_DISABLE_NUMBA="1")
    code = "from spiked_rmt._accel import NUMBA_ENABLED; print(NUMBA_ENABLED)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"


@pytest.mark.skipif(not NUMBA_ENABLED, reason="numba not active")
def test_compiled_when_enabled():
    assert hasattr(kernels.stieltjes, "py_func")
