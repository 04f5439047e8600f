"""Monte Carlo eigenvalues of the spiked ensemble and comparison with limit laws.

The Gaussian potential is sampled exactly as ``A + H`` with ``H`` a GUE
matrix of variance ``1/n``.  General potentials use a Metropolis chain on
the joint eigenvalue density.  Every trial draws from its own stream
``default_rng([seed, trial])`` so results do not depend on batching.
"""

import csv
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import linalg, stats

from .errors import BadScale, DomainError, NonConvergence
from .finite import _basis
from .kernels import mcmc_chain
from .phase import solve_equilibrium

__all__ = [
    "SampleBatch",
    "RescaledStatistic",
    "sample_gaussian_spiked",
    "sample_general_mcmc",
    "rescale",
    "ks_distance",
    "gelman_rubin",
    "save_batch",
    "load_batch",
    "export_csv",
]

_MAGIC = b"SPKB"
_VERSION = 1
_METHODS = ("exact", "mcmc")


@dataclass(frozen=True)
class SampleBatch:
    """Eigenvalue samples, one descending row per trial.

    ``eigenvalues`` has shape ``(trials, kept)``; ``kept`` equals ``n``
    unless only the top eigenvalues were requested.
    """

    n: int
    spikes: tuple
    trials: int
    eigenvalues: np.ndarray = field(repr=False)
    seed: int
    method: str
    info: dict = field(default_factory=dict)

    @property
    def kept(self):
        return self.eigenvalues.shape[1]

    def top(self, k):
        """The ``k``-th largest eigenvalue of every trial (``k`` starts at 1)."""
        if not 1 <= k <= self.kept:
            raise DomainError(f"k must be in 1..{self.kept}")
        return self.eigenvalues[:, k - 1]


@dataclass(frozen=True)
class RescaledStatistic:
    """``k``-th eigenvalue centred at ``center`` and multiplied by ``scale``."""

    k: int
    mode: str
    center: float
    scale: float
    values: np.ndarray = field(repr=False)


# ---------------------------------------------------------------- exact sampler


@lru_cache(maxsize=8)
def _upper_indices(n):
    return np.triu_indices(n, 1)


def _gue(n, rng):
    """Hermitian matrix with density proportional to ``exp(-(n/2) Tr H^2)``."""
    h = np.zeros((n, n), dtype=complex)
    iu = _upper_indices(n)
    count = iu[0].size
    z = rng.standard_normal(2 * count).reshape(2, count) / np.sqrt(2.0 * n)
    h[iu] = z[0] + 1j * z[1]
    h = h + h.conj().T
    h[np.diag_indices(n)] = rng.standard_normal(n) / np.sqrt(n)
    return h


def _lanczos_top(h, keep, rng, tol=1e-6, start=30, step=10, max_steps=200):
    """Top ``keep`` eigenvalues by Lanczos with full reorthogonalisation.

    Stops once every Ritz residual bound is below ``tol``; the eigenvalue
    error is then of order ``tol**2 / gap``.  Falls back to a dense solver if
    that does not happen within ``max_steps`` iterations.
    """
    n = h.shape[0]
    if n <= max(2 * start, keep + 2):
        return np.sort(linalg.eigvalsh(h))[::-1][:keep]
    q = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    basis = np.zeros((max_steps + 1, n), dtype=complex)
    basis[0] = q / np.linalg.norm(q)
    alpha = np.zeros(max_steps)
    beta = np.zeros(max_steps)
    done = 0
    target = start
    while target <= max_steps:
        for j in range(done, target):
            w = h @ basis[j]
            alpha[j] = np.vdot(basis[j], w).real
            for _ in range(2):
                w -= (basis[: j + 1] @ w.conj()).conj() @ basis[: j + 1]
            beta[j] = np.linalg.norm(w)
            basis[j + 1] = w / beta[j]
        done = target
        theta, vec = linalg.eigh_tridiagonal(alpha[:done], beta[: done - 1])
        resid = np.abs(beta[done - 1] * vec[-1, -keep:])
        if np.all(resid < tol):
            return theta[::-1][:keep]
        target += step
    return np.sort(linalg.eigvalsh(h))[::-1][:keep]


def _exact_trial(n, shift, keep, seed, t):
    rng = np.random.default_rng([seed, t])
    h = _gue(n, rng)
    h[np.diag_indices(n)] += shift
    if keep == n:
        return linalg.eigvalsh(h)[::-1]
    return _lanczos_top(h, keep, rng)


def sample_gaussian_spiked(n, a_list, trials, seed, keep=None, workers=1):
    """Exact eigenvalues of ``diag(a) + H`` for the Gaussian potential.

    With ``keep`` only the top ``keep`` eigenvalues of each trial are
    computed (Lanczos with a residual check), which is what limit-law
    comparisons need.  Trials run on ``workers`` threads; since each trial
    owns its random stream the output does not depend on ``workers``.
    """
    n, trials, seed = int(n), int(trials), int(seed)
    if not 1 <= n <= 2000:
        raise DomainError("n must be in 1..2000")
    if not 1 <= trials <= 1_000_000:
        raise DomainError("trials must be in 1..1e6")
    a_list = tuple(float(a) for a in a_list)
    if len(a_list) > n:
        raise DomainError("more spikes than eigenvalues")
    keep = n if keep is None else int(keep)
    if not 1 <= keep <= n:
        raise DomainError("keep must be in 1..n")
    if int(workers) < 1:
        raise DomainError("workers must be at least 1")
    shift = np.zeros(n)
    shift[: len(a_list)] = a_list
    out = np.empty((trials, keep))
    if int(workers) == 1:
        for t in range(trials):
            out[t] = _exact_trial(n, shift, keep, seed, t)
    else:
        with ThreadPoolExecutor(int(workers)) as pool:
            rows = pool.map(lambda t: _exact_trial(n, shift, keep, seed, t), range(trials))
            for t, row in enumerate(rows):
                out[t] = row
    return SampleBatch(n, a_list, trials, out, seed, "exact")


# ---------------------------------------------------------------- MCMC


def gelman_rubin(chains):
    """Potential scale reduction factor for an array of shape ``(chains, draws)``."""
    chains = np.asarray(chains, dtype=float)
    m, k = chains.shape
    means = chains.mean(axis=1)
    within = chains.var(axis=1, ddof=1).mean()
    between = k * means.var(ddof=1)
    if within == 0:
        return np.inf if between > 0 else 1.0
    pooled = (k - 1) / k * within + between / k
    return float(np.sqrt(pooled / within))


def _spike_shift(potential, scale, a):
    """``max_x scale (a x - V(x)/2)``, used to keep spike rows of order one."""
    crit = potential.real_roots(P.polysub(0.5 * potential.d1, [a]))
    return float(np.max(scale * (a * crit - 0.5 * potential.V(crit))))


def sample_general_mcmc(potential, n, a_list, trials, steps, seed, chains=4, target=0.3):
    """Metropolis sampling of the spiked eigenvalue density for a general potential.

    Each of ``chains`` chains runs ``steps`` sweeps; the first half adapts
    the proposal scale and is discarded, the second half is thinned to
    ``ceil(trials / chains)`` recorded states.  Zero spikes are dropped
    since they do not change the density.

    Raises
    ------
    NonConvergence
        ``steps`` is zero, or the Gelman-Rubin factor of the top eigenvalue
        across chains exceeds 1.1.
    """
    n, trials, steps, seed = int(n), int(trials), int(steps), int(seed)
    if not 1 <= n <= 60:
        raise DomainError("MCMC supports 1 <= n <= 60")
    if steps < 1:
        raise NonConvergence("no sweeps requested; convergence cannot be assessed")
    spikes = np.array([float(a) for a in a_list if a != 0.0])
    if spikes.size > n:
        raise DomainError("more spikes than eigenvalues")
    per_chain = -(-trials // chains)
    burn = steps // 2
    thin = (steps - burn) // per_chain
    if thin < 1:
        raise DomainError("steps too small for the requested number of trials")
    basis = _basis(potential, float(n), n)
    shifts = np.array([_spike_shift(potential, n, a) for a in spikes])
    eq = solve_equilibrium(potential)
    centre, radius = eq.center, eq.radius
    samples = []
    rates = []
    for c in range(chains):
        rng = np.random.default_rng([seed, c])
        grid = centre + radius * np.cos(np.pi * (np.arange(n) + 0.5) / n)
        lam0 = grid + 0.1 * radius / n * rng.standard_normal(n)
        sweeps = burn + per_chain * thin
        normals = rng.standard_normal((sweeps, n))
        uniforms = rng.random((sweeps, n))
        draws, rate, _ = mcmc_chain(
            lam0, radius / n, normals, uniforms, basis.a, basis.b, basis.mu0,
            np.asarray(potential.coef, dtype=float), float(n), spikes, shifts,
            burn, thin, target,
        )
        samples.append(np.sort(draws, axis=1)[:, ::-1])
        rates.append(rate)
    tops = np.array([s[:, 0] for s in samples])
    rhat = gelman_rubin(tops)
    if not rhat <= 1.1:
        raise NonConvergence(f"Gelman-Rubin factor {rhat:.3f} exceeds 1.1")
    eig = np.concatenate(samples)[:trials]
    # batch means (10 per chain) absorb the autocorrelation of each chain
    per = tops.shape[1] // 10
    if per > 0:
        batch_means = tops[:, : 10 * per].reshape(chains * 10, per).mean(axis=1)
        top_se = float(batch_means.std(ddof=1) / np.sqrt(batch_means.size))
    else:
        top_se = float("nan")
    info = {"rhat": rhat, "top_se": top_se, "acceptance": rates, "burn": burn, "thin": thin, "chains": chains}
    return SampleBatch(n, tuple(float(a) for a in a_list), trials, eig, seed, "mcmc", info)


# ---------------------------------------------------------------- rescaling


def rescale(batch, k, mode, center, curvature=None, beta=None):
    """Rescale the ``k``-th largest eigenvalue.

    ``mode="edge"``: ``(xi_k - e) beta n^{2/3}`` with ``center = e``.
    ``mode="outlier"``: ``(xi_k - x) sqrt(-G'' n)`` with ``center = x`` and
    ``curvature = G''(x)``.
    """
    center = float(center)
    if not np.isfinite(center):
        raise BadScale("center must be finite")
    if mode == "edge":
        if beta is None or not beta > 0 or not np.isfinite(beta):
            raise BadScale("edge scaling needs beta > 0")
        scale = float(beta) * batch.n ** (2.0 / 3.0)
    elif mode == "outlier":
        if curvature is None or not curvature < 0 or not np.isfinite(curvature):
            raise BadScale("outlier scaling needs G'' < 0")
        scale = float(np.sqrt(-curvature * batch.n))
    else:
        raise DomainError("mode must be 'edge' or 'outlier'")
    return RescaledStatistic(int(k), mode, center, scale, (batch.top(k) - center) * scale)


def ks_distance(sample, cdf):
    """Kolmogorov distance between the empirical law of ``sample`` and ``cdf``."""
    sample = np.asarray(sample, dtype=float).ravel()
    if sample.size == 0:
        raise DomainError("empty sample")
    return float(stats.kstest(sample, lambda x: np.asarray(cdf(x), dtype=float).ravel()).statistic)


# ---------------------------------------------------------------- persistence


_HEADER = struct.Struct("<4sHIIqIBI")


def save_batch(batch, path):
    """Binary format: header, spikes, then little-endian float64 rows."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(
            _MAGIC, _VERSION, batch.n, len(batch.spikes), batch.seed, batch.trials,
            _METHODS.index(batch.method), batch.kept,
        ))
        fh.write(np.asarray(batch.spikes, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(batch.eigenvalues, dtype="<f8").tobytes())


def load_batch(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, version, n, m, seed, trials, method, kept = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != _VERSION:
        raise DomainError("not a sample file of a supported version")
    off = _HEADER.size
    spikes = np.frombuffer(raw, "<f8", m, off)
    off += 8 * m
    eig = np.frombuffer(raw, "<f8", trials * kept, off).reshape(trials, kept).astype(float)
    return SampleBatch(n, tuple(spikes.tolist()), trials, eig, seed, _METHODS[method])


def export_csv(batch, path):
    """One row per trial: ``trial, xi_1, .., xi_kept``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial"] + [f"xi_{k}" for k in range(1, batch.kept + 1)])
        for t, row in enumerate(batch.eigenvalues):
            writer.writerow([t] + [f"{v:.17g}" for v in row])
