"""Exact finite-n expectations of the spiked ensemble.

For ``d`` eigenvalues with weight ``exp(-n V)`` and spikes ``a_1..a_m``
(entering as ``exp(n a x)``) this module evaluates

    E_d(a; E; s) = E[ prod_i (1 - s chi_E(lambda_i)) ]

in three independent ways:

* ``expectation_rank_m_direct`` reduces the Fredholm determinant of the
  rank-m perturbed Christoffel-Darboux kernel to a small matrix determinant;
* ``expectation_rank_m_identity`` combines rank-one expectations in lower
  dimensions through a ratio of m x m determinants;
* ``brute_force_expectation`` integrates the joint eigenvalue density by
  tensor Gauss-Legendre quadrature (``d <= 3``).
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    DomainError,
    HypothesisViolated,
    IllConditionedB,
    LossOfOrthogonality,
    QuadratureFailure,
    SingularGammaMatrix,
    SingularOperator,
    UnderflowRange,
    ValidationError,
)
from .kernels import orthopoly_values, stieltjes
from .quadrature import composite_gauss_legendre, taylor_coefficients

__all__ = [
    "OrthoBasis",
    "build_basis",
    "gamma_j",
    "gram_restriction",
    "expectation_null",
    "expectation_rank_one",
    "expectation_rank_m_direct",
    "expectation_rank_m_identity",
    "brute_force_expectation",
    "gap_prob",
    "spiked_kernel_data",
]

_LOG_RANGE = 700.0
_NODES = 24


def _v_min(pot, a=0.0):
    """Global minimum of ``V(x) - a x``."""
    crit = pot.real_roots(P.polysub(pot.d1, [a]))
    return float(np.min(pot.V(crit) - a * crit))


def _level_interval(pot, n, a=0.0, log_range=_LOG_RANGE):
    """Interval where ``n (V(x) - a x - min) < log_range``."""
    vmin = _v_min(pot, a)
    poly = P.polysub(pot.coef, [vmin + log_range / n, a])
    roots = pot.real_roots(poly)
    if roots.size < 2:
        raise UnderflowRange("could not bracket the weight")
    return float(roots[0]), float(roots[-1])


def _normalise_set(E):
    """Turn ``x_lo`` or ``[(lo, hi), ...]`` into a sorted list of intervals."""
    if E is None:
        return [(-np.inf, np.inf)]
    if np.isscalar(E):
        return [(float(E), np.inf)]
    E = list(E)
    if len(E) == 2 and all(np.isscalar(v) for v in E):
        E = [tuple(E)]
    out = sorted((float(lo), float(hi)) for lo, hi in E)
    for lo, hi in out:
        if not lo < hi:
            raise ValidationError(f"empty interval ({lo}, {hi})")
    return out


@dataclass(frozen=True)
class OrthoBasis:
    """Orthonormal polynomials for ``exp(-n V(x)) dx``.

    Attributes
    ----------
    potential : Potential
    n : float
        Scale in the weight.
    max_degree : int
        Number of recurrence coefficients (polynomials ``p_0..p_{d}``).
    a, b : ndarray
        Recurrence ``x p_k = b_k p_{k+1} + a_k p_k + b_{k-1} p_{k-1}``.
    mu0 : float
        Total mass of the weight.
    support : tuple
        Interval outside which the weight is below ``exp(-700)`` relative.
    """

    potential: object
    n: float
    max_degree: int
    a: np.ndarray
    b: np.ndarray
    mu0: float
    support: tuple
    closed_form: bool = False

    @property
    def leading_coefficients(self):
        """``gamma_k`` of ``p_k(x) = gamma_k x^k + ...``."""
        g = np.empty(self.max_degree + 1)
        g[0] = 1 / np.sqrt(self.mu0)
        for k in range(self.max_degree):
            g[k + 1] = g[k] / self.b[k]
        return g

    def p(self, x, count):
        """``p_0..p_{count-1}`` at ``x`` as a ``(count, len(x))`` array."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if count > self.max_degree + 1:
            raise DomainError(f"basis holds degrees up to {self.max_degree}")
        return orthopoly_values(x, self.a, self.b, self.mu0, count)

    def psi(self, x, count):
        """``psi_k(x) = p_k(x) exp(-n V(x)/2)``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self.p(x, count) * np.exp(-0.5 * self.n * self.potential.V(x))

    def log_weight(self, x, a=0.0):
        return self.n * (a * x - self.potential.V(x))

    def rule(self, E=None, a_list=(), panels_per_unit=None):
        """Composite Gauss rule covering the weights of all spikes, cut to ``E``."""
        lo, hi = self.support
        for a in a_list:
            l2, h2 = _level_interval(self.potential, self.n, a)
            lo, hi = min(lo, l2), max(hi, h2)
        density = panels_per_unit or max(3.0, 2.5 * np.sqrt(self.n))
        nodes, weights = [], []
        for elo, ehi in _normalise_set(E):
            a_, b_ = max(lo, elo), min(hi, ehi)
            if a_ >= b_:
                continue
            k = max(4, int(np.ceil((b_ - a_) * density)))
            r = composite_gauss_legendre(np.linspace(a_, b_, k + 1), _NODES)
            nodes.append(r.nodes)
            weights.append(r.weights)
        if not nodes:
            return np.zeros(0), np.zeros(0)
        return np.concatenate(nodes), np.concatenate(weights)


def build_basis(potential, n, d, closed_form=None, panels_per_unit=None):
    """Orthonormal basis for ``exp(-n V)`` up to degree ``d``.

    Uses the discretised Stieltjes procedure on a composite Gauss grid over
    the region where the weight exceeds ``exp(-700)`` of its peak.  For the
    Gaussian potential the scaled Hermite recurrence ``b_k = sqrt((k+1)/n)``
    is available in closed form (``closed_form=True``, the default there).

    Raises
    ------
    LossOfOrthogonality
        The computed family deviates from orthonormality by more than 1e-7.
    """
    n = float(n)
    d = int(d)
    if d < 1 or d > 40 or n <= 0 or n > 50:
        raise DomainError("build_basis supports 1 <= d <= 40 and 0 < n <= 50")
    return _basis(potential, n, d, closed_form, panels_per_unit)


def _basis(potential, n, d, closed_form=None, panels_per_unit=None):
    """:func:`build_basis` without the desk-scale limits."""
    support = _level_interval(potential, n)
    if closed_form is None:
        closed_form = potential.is_gaussian
    if closed_form:
        if not potential.is_gaussian:
            raise ValidationError("closed form available only for the Gaussian potential")
        a = np.zeros(d + 1)
        b = np.sqrt((np.arange(d + 1) + 1.0) / n)
        basis = OrthoBasis(potential, n, d, a, b, float(np.sqrt(2 * np.pi / n)), support, True)
    else:
        vmin = _v_min(potential)
        tmp = OrthoBasis(potential, n, d, np.zeros(d + 1), np.ones(d + 1), 1.0, support)
        x, w = tmp.rule(panels_per_unit=panels_per_unit)
        # carry exp(n vmin) so the discrete mass stays O(1)
        ww = w * np.exp(-n * (potential.V(x) - vmin))
        a, b, mu0 = stieltjes(x, ww, d + 1)
        basis = OrthoBasis(potential, n, d, a, b, float(mu0 * np.exp(-n * vmin)), support, False)
    dev = orthonormality_defect(basis)
    if dev > 1e-7:
        raise LossOfOrthogonality(f"Gram deviation {dev:.2e}")
    return basis


def orthonormality_defect(basis, count=None):
    count = basis.max_degree + 1 if count is None else count
    x, w = basis.rule()
    psi = basis.psi(x, count)
    gram = (psi * w) @ psi.T
    return float(np.max(np.abs(gram - np.eye(count))))


def gamma_vector(basis, count, a, panels_per_unit=None):
    """``Gamma_j(a; n) = int exp(n(a x - V/2)) psi_j dx`` for ``j < count``."""
    pot = basis.potential
    lo, hi = _level_interval(pot, basis.n, a)
    density = panels_per_unit or max(3.0, 2.5 * np.sqrt(basis.n))
    k = max(4, int(np.ceil((hi - lo) * density)))
    r = composite_gauss_legendre(np.linspace(lo, hi, k + 1), _NODES)
    w = r.weights * np.exp(basis.log_weight(r.nodes, a))
    vals = basis.p(r.nodes, count) @ w
    if not np.all(np.isfinite(vals)):
        raise QuadratureFailure("non-finite Gamma integral")
    return vals


def gamma_j(basis, j, a, panels_per_unit=None):
    """Single ``Gamma_j(a; n)``; see :func:`gamma_vector`."""
    return float(gamma_vector(basis, j + 1, a, panels_per_unit)[j])


def gram_restriction(basis, d, E):
    """Matrix ``int_E psi_i psi_j`` for ``i, j < d``."""
    x, w = basis.rule(E)
    psi = basis.psi(x, d)
    return (psi * w) @ psi.T


def _check_spikes(a_list, min_gap=1e-8):
    a = np.asarray(a_list, dtype=float).ravel()
    if np.any(a == 0):
        raise ValidationError("spikes must be nonzero")
    if a.size > 1:
        diff = np.abs(np.subtract.outer(a, a))[~np.eye(a.size, dtype=bool)]
        if np.min(diff) < min_gap:
            raise ValidationError("spikes must be distinct (confluent case unsupported)")
    return a


def expectation_null(basis, d, E, s):
    """``det(I - s * Gram_E)`` over ``psi_0..psi_{d-1}``."""
    if d > basis.max_degree + 1:
        raise DomainError("dimension exceeds the basis")
    if d == 0:
        return 1.0 + 0j
    G = gram_restriction(basis, d, E)
    return complex(np.linalg.det(np.eye(d) - s * G))


def _spike_inner(basis, count, a, E):
    """``int_E psi_i exp(n(a x - V/2)) dx`` for ``i < count``."""
    x, w = basis.rule(E, a_list=(a,))
    return basis.p(x, count) @ (w * np.exp(basis.log_weight(x, a)))


def expectation_rank_one(basis, d, a, E, s):
    """Rank-one expectation in dimension ``d`` from the handy formula.

    ``E_{d-1}(E; s) * [1 - s <psit, chi psi_{d-1}> - s^2 <(1 - s chi K chi)^{-1}
    chi K chi psit, chi psi_{d-1}>]`` with ``K`` the kernel of
    ``psi_0..psi_{d-2}`` and ``psit = (v - K v) / Gamma_{d-1}(a)``,
    ``v = exp(n(a x - V/2))``.  Every inner product reduces to Gram
    quantities, so the formula is evaluated exactly up to quadrature.
    """
    _check_spikes([a])
    ell = d - 1
    gam = gamma_vector(basis, d, a)
    G = gram_restriction(basis, d, E)
    vE = _spike_inner(basis, d, a, E)
    # <psi_i, chi psit> for i <= ell
    u = (vE - G[:, :ell] @ gam[:ell]) / gam[ell]
    Gl = G[:ell, :ell]
    M = np.eye(ell) - s * Gl
    null = np.linalg.det(M) if ell else 1.0
    t1 = u[ell]
    if ell:
        try:
            c = np.linalg.solve(M, u[:ell])
        except np.linalg.LinAlgError:
            raise SingularOperator("1 - s chi K chi is singular") from None
        t2 = c @ G[:ell, ell]
    else:
        t2 = 0.0
    return complex(null * (1 - s * t1 - s * s * t2))


@dataclass(frozen=True)
class SpikedKernelData:
    """Pieces of the rank-m perturbed kernel ``K_d + sum_j w_j (x) (B^{-1} t)_j``."""

    spikes: np.ndarray
    B: np.ndarray
    gammas: np.ndarray
    condition_number: float


def spiked_kernel_data(basis, d, a_list):
    """Matrix ``B_{jk} = Gamma_{d-m+j-1}(a_k)`` and all ``Gamma_i(a_k)``, ``i < d``."""
    a = _check_spikes(a_list)
    m = a.size
    if m > d:
        raise ValidationError("rank exceeds dimension")
    gam = np.column_stack([gamma_vector(basis, d, ak) for ak in a]) if m else np.zeros((d, 0))
    B = gam[d - m:, :]
    cond = float(np.linalg.cond(B)) if m else 1.0
    return SpikedKernelData(a, B, gam, cond)


def expectation_rank_m_direct(basis, d, a_list, E, s, data=None):
    """Fredholm determinant of the rank-m perturbed kernel, reduced exactly.

    Writes ``K~ = sum_i psi_i (x) psi_i + sum_j w_j (x) (B^{-1} t)_j`` as a
    sum of ``d + m`` separable terms and evaluates
    ``det(I - s [<g_r, chi_E f_q>])`` with all entries from Gram integrals.

    Raises
    ------
    IllConditionedB
        ``cond(B) > 1e12``.
    """
    a = _check_spikes(a_list)
    m = a.size
    if m == 0:
        return expectation_null(basis, d, E, s)
    data = spiked_kernel_data(basis, d, a) if data is None else data
    if not data.condition_number < 1e12:
        raise IllConditionedB(f"cond(B) = {data.condition_number:.3e}")
    gam = data.gammas
    G = gram_restriction(basis, d, E)
    vE = np.column_stack([_spike_inner(basis, d, ak, E) for ak in a])
    # <psi_k, chi w_j> with w_j = v_j - sum_i Gamma_i(a_j) psi_i
    Gw = vE - G @ gam
    Binv_rows = np.linalg.solve(data.B, np.eye(m))  # (B^{-1} t)_j = sum_l Binv[j,l] psi_{d-m+l}
    R = np.zeros((d + m, d + m), dtype=complex)
    # left functions f: psi_0..psi_{d-1}, w_1..w_m ; right functions g likewise
    R[:d, :d] = G
    R[:d, d:] = Gw
    R[d:, :d] = Binv_rows @ G[d - m:, :]
    R[d:, d:] = Binv_rows @ Gw[d - m:, :]
    return complex(np.linalg.det(np.eye(d + m) - s * R))


def expectation_biorthogonal(basis, d, a_list, E, s):
    """Same quantity as the direct route via the ``d x d`` biorthogonal form.

    ``det[<psi_k, (1 - s chi_E) phi_i>] / det[<psi_k, phi_i>]`` with
    ``phi = (psi_0..psi_{d-m-1}, v_1..v_m)``.
    """
    a = _check_spikes(a_list)
    m = a.size
    G = gram_restriction(basis, d, E)
    M0 = np.eye(d)
    N = G.copy()
    for j, ak in enumerate(a):
        col = d - m + j
        M0[:, col] = gamma_vector(basis, d, ak)
        N[:, col] = _spike_inner(basis, d, ak, E)
    return complex(np.linalg.det(M0 - s * N) / np.linalg.det(M0))


def expectation_rank_m_identity(basis, d, a_list, E, s):
    """Rank-m expectation assembled from rank-one ones in lower dimensions.

    ``Ebar_d(a; E; s) = det[Gamma_{d-j}(a_k) Ebar_{d-j+1}(a_k)] / det[Gamma_{d-j}(a_k)]``
    with ``Ebar_D(a) = E_D(a) / E_D`` and finally ``E_d(a) = E_d * Ebar_d(a)``.

    Raises
    ------
    HypothesisViolated
        Some null expectation ``E_{d-j+1}(E; s)`` vanishes.
    SingularGammaMatrix
        The Gamma matrix is numerically singular.
    """
    a = _check_spikes(a_list)
    m = a.size
    if m == 0:
        return expectation_null(basis, d, E, s)
    if m > d:
        raise ValidationError("rank exceeds dimension")
    gam = np.column_stack([gamma_vector(basis, d, ak) for ak in a])
    num = np.empty((m, m), dtype=complex)
    den = np.empty((m, m))
    nulls = {}
    for j in range(1, m + 1):
        D = d - j + 1
        nulls[D] = expectation_null(basis, D, E, s)
        if abs(nulls[D]) < 1e-14:
            raise HypothesisViolated(f"null expectation vanishes in dimension {D}")
        for k, ak in enumerate(a):
            den[j - 1, k] = gam[d - j, k]
            num[j - 1, k] = gam[d - j, k] * expectation_rank_one(basis, D, ak, E, s) / nulls[D]
    dden = np.linalg.det(den)
    if abs(dden) < 1e-300 or np.linalg.cond(den) > 1e14:
        raise SingularGammaMatrix("Gamma matrix is singular")
    return complex(nulls[d] * np.linalg.det(num) / dden)


def gap_prob(basis, d, a_list, E, j, method="direct"):
    """Probability of at most ``j - 1`` eigenvalues in ``E``.

    ``sum_{i<j} (-1)^i/i! d^i/ds^i E_d(a; E; s)`` at ``s = 1``, the
    derivatives from a Cauchy integral (exact here: polynomial in ``s``).
    """
    if not 1 <= j <= 4:
        raise DomainError("j must be in 1..4")
    route = {"direct": expectation_rank_m_direct, "identity": expectation_rank_m_identity}[method]
    a = np.asarray(a_list, dtype=float)

    def f(svals):
        return np.array([route(basis, d, a, E, sv) for sv in svals])

    coef = taylor_coefficients(f, 1.0, j - 1, radius=0.5, nodes=max(16, 2 * d + 4))
    signs = (-1.0) ** np.arange(j)
    return float(np.real(signs @ coef[:j]))


# ---------------------------------------------------------------- oracle


def brute_force_expectation(potential, n, a_list, E, s, d, nodes=60):
    """Tensor-quadrature integral of the joint eigenvalue density.

    The density of unordered eigenvalues is proportional to
    ``Delta(x) det[x_j^k (k < d-m); exp(n a_i x_j)] prod exp(-n V(x_j))``,
    the zero spikes forming the confluent monomial block.  Numerator and
    normaliser use the same ``nodes``-point Gauss rule per dimension, split at
    the boundary points of ``E`` so each piece integrates a smooth function.
    """
    a = _check_spikes(a_list) if len(a_list) else np.zeros(0)
    m = a.size
    if d > 3:
        raise DomainError("brute force limited to d <= 3")
    lo, hi = _level_interval(potential, n, 0.0, 41.4)
    for ak in a:
        l2, h2 = _level_interval(potential, n, ak, 41.4)
        lo, hi = min(lo, l2), max(hi, h2)
    cuts = sorted({v for iv in _normalise_set(E) for v in iv if np.isfinite(v) and lo < v < hi})
    br = np.array([lo] + cuts + [hi])
    x1, w1 = np.polynomial.legendre.leggauss(nodes)
    xs, ws = [], []
    for p0, p1 in zip(br[:-1], br[1:]):
        xs.append(0.5 * (p1 - p0) * (x1 + 1) + p0)
        ws.append(0.5 * (p1 - p0) * w1)
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    inE = np.zeros(x.size, bool)
    for elo, ehi in _normalise_set(E):
        inE |= (x >= elo) & (x <= ehi)
    grids = np.meshgrid(*([x] * d), indexing="ij")
    lam = np.stack([g.ravel() for g in grids], axis=-1)
    wt = np.ones(lam.shape[0])
    fac = np.ones(lam.shape[0], dtype=complex)
    for k, g in enumerate(np.meshgrid(*([np.arange(x.size)] * d), indexing="ij")):
        idx = g.ravel()
        wt = wt * w[idx] * np.exp(-n * (potential.V(x[idx]) - _v_min(potential)))
        fac = fac * (1 - s * inE[idx])
    vander = np.ones(lam.shape[0])
    for i in range(d):
        for j in range(i + 1, d):
            vander = vander * (lam[:, j] - lam[:, i])
    rows = [lam**k for k in range(d - m)]
    for ak in a:
        shift = n * ak * (hi if ak > 0 else lo)  # per-row max subtraction
        rows.append(np.exp(n * ak * lam - shift))
    mixed = np.linalg.det(np.stack(rows, axis=1))
    dens = vander * mixed * wt
    Z = dens.sum()
    return complex((dens * fac).sum() / Z)


