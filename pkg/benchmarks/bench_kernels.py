"""Compare the compiled kernels with their pure numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py``.  The compiled timings are
taken after a warm-up call so that JIT compilation is excluded.  The numpy
column calls the uncompiled outer function, which still calls compiled
helpers; for a fully uncompiled run set ``SPIKED_RMT_DISABLE_NUMBA=1``.
"""

import argparse
import time

import numpy as np

from spiked_rmt import kernels
from spiked_rmt._accel import NUMBA_ENABLED, python_version
from spiked_rmt.finite import _basis
from spiked_rmt.phase import Potential, solve_equilibrium
from spiked_rmt.quadrature import composite_gauss_legendre
from spiked_rmt.sampler import _spike_shift


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        func()
        times.append(time.perf_counter() - start)
    return min(times)


def stieltjes_case(degree=40, points=4000):
    rule = composite_gauss_legendre(np.linspace(-3.0, 3.0, points // 20 + 1), 20)
    weights = rule.weights * np.exp(-degree * rule.nodes**2 / 2)
    return (rule.nodes, weights, degree)


def mcmc_case(n=30, sweeps=400, seed=0):
    pot = Potential.gaussian()
    eq = solve_equilibrium(pot)
    basis = _basis(pot, float(n), n)
    rng = np.random.default_rng(seed)
    lam0 = eq.radius * np.cos(np.pi * (np.arange(n) + 0.5) / n)
    spikes = np.array([1.8])
    shifts = np.array([_spike_shift(pot, n, 1.8)])
    return (
        lam0, eq.radius / n, rng.standard_normal((sweeps, n)), rng.random((sweeps, n)),
        basis.a, basis.b, basis.mu0, np.asarray(pot.coef, dtype=float), float(n),
        spikes, shifts, sweeps // 2, 1, 0.3,
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    cases = {
        "stieltjes": (kernels.stieltjes, stieltjes_case()),
        "mcmc_chain": (kernels.mcmc_chain, mcmc_case()),
    }
    print(f"numba enabled: {NUMBA_ENABLED}")
    print(f"{'kernel':<12} {'compiled [s]':>14} {'numpy [s]':>12} {'speed-up':>10}")
    for name, (kernel, inputs) in cases.items():
        slow = python_version(kernel)
        kernel(*inputs)
        fast_t = best_of(lambda: kernel(*inputs), args.repeat)
        slow_t = best_of(lambda: slow(*inputs), args.repeat)
        print(f"{name:<12} {fast_t:>14.4f} {slow_t:>12.4f} {slow_t / fast_t:>10.1f}")


if __name__ == "__main__":
    main()
