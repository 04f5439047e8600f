"""Limiting distributions: Tracy-Widom family, deformed Airy laws, spiked GUE laws.

All Airy-kernel operators are discretised by a Nystrom rule on ``[T, inf)``
with the map ``xi = T + L u / (1 - u)`` and Gauss-Legendre nodes in ``u``.
Airy values are carried in exponentially scaled form so the far nodes never
underflow, and the symmetrised kernel matrix is diagonalised once per ``T``;
every value of the spectral parameter ``s`` then costs ``O(N)``.
"""

import csv
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy import special

from .errors import (
    ConfluentAlphas,
    DomainError,
    Divergence,
    SingularDenominator,
    SingularOperator,
    WindowTooSmall,
)
from .quadrature import (
    _leggauss,
    airy_scale_exponent,
    airy_scaled,
    c_alpha_scaled,
    jth_law_from_taylor,
    spiked_moments,
    taylor_coefficients,
)

__all__ = [
    "AiryDiscretization",
    "LawCurve",
    "airy_kernel",
    "discretize",
    "fredholm_tw",
    "tw_jth",
    "resolvent_apply",
    "f1",
    "fk",
    "fk_jth",
    "gk",
    "gk_jth",
    "normal_cdf",
    "law_curve",
]

DEFAULT_NODES = 80
DEFAULT_SCALE = 10.0
T_MIN = -12.0
DOUBLING_TOL = 1e-7
CAUCHY_RADIUS = 0.5
CAUCHY_NODES = 64
CHEB_HALF_WIDTH = 3.0
CHEB_POINTS = 120
ALPHA_MIN_GAP = 1e-4
_NEAR_DIAGONAL = 1e-5


# ---------------------------------------------------------------- kernel


def airy_kernel(x, y):
    """Airy kernel ``(Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y)``.

    Accepts broadcastable arrays.  For ``|x - y| < 1e-5`` a second-order
    expansion about ``x`` replaces the quotient, which is exact on the
    diagonal (``Ai'(x)^2 - x Ai(x)^2``) and avoids cancellation nearby.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = x.shape
    x, y = x.ravel(), y.ravel()
    ax, apx, zx = airy_scaled(x)
    ay, apy, zy = airy_scaled(y)
    out = (_scaled_kernel(x, y, ax, apx, ay, apy) * np.exp(-zx - zy)).reshape(shape)
    return out if out.ndim else float(out)


def _scaled_kernel(x, y, ax, apx, ay, apy):
    """Kernel with the factor ``exp(-zeta(x) - zeta(y))`` removed."""
    h = y - x
    near = np.abs(h) < _NEAR_DIAGONAL
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (ax * apy - apx * ay) / (x - y)
    if np.any(near):
        # Taylor expansion of K(x, x + h) in h, built from Ai'' = x Ai
        a, ap, xx, hh = ax[near], apx[near], x[near], h[near]
        diag = ap * ap - xx * a * a
        first = -0.5 * a * a
        second = -(a * ap + xx * xx * a * a - xx * ap * ap) / 6.0
        # rescale the y factor exp(zeta(x) - zeta(y)) back to the x scale
        corr = np.exp(airy_scale_exponent(xx + hh) - airy_scale_exponent(xx))
        out[near] = (diag + hh * first + hh * hh * second) * corr
    return out


# ---------------------------------------------------------------- discretisation


@dataclass(frozen=True)
class AiryDiscretization:
    """Nystrom discretisation of the Airy operator on ``[T, inf)``.

    ``matrix`` holds ``sqrt(w_i) K(xi_i, xi_j) sqrt(w_j)``; ``eigvals`` and
    ``eigvecs`` are its symmetric eigendecomposition.  Scaled Airy values
    ``ai_s = Ai e^{zeta}`` and ``kernel_s = K e^{zeta_i + zeta_j}`` are kept so
    that resolvent solutions can be reconstructed without overflow.
    """

    T: float
    scale: float
    node_count: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    zeta: np.ndarray = field(repr=False)
    ai_s: np.ndarray = field(repr=False)
    kernel_s: np.ndarray = field(repr=False)
    matrix: np.ndarray = field(repr=False)
    eigvals: np.ndarray = field(repr=False)
    eigvecs: np.ndarray = field(repr=False)

    @property
    def damp(self):
        """``sqrt(w) exp(-zeta)``, the map from scaled values to symmetric form."""
        return np.sqrt(self.weights) * np.exp(-self.zeta)

    def determinant(self, s):
        """``det(1 - s K)`` for scalar or array ``s``."""
        s = np.asarray(s, dtype=complex)
        vals = np.prod(1.0 - s[..., None] * self.eigvals, axis=-1)
        if np.all(vals.imag == 0):
            vals = vals.real
        return vals if vals.ndim else vals[()]


def discretize(T, nodes=DEFAULT_NODES, scale=DEFAULT_SCALE):
    """Build the :class:`AiryDiscretization` for the interval ``[T, inf)``."""
    T = float(T)
    if not np.isfinite(T) or T < T_MIN:
        raise DomainError(f"T must be finite and >= {T_MIN}")
    nodes = int(nodes)
    u, wu = _leggauss(nodes)
    u = 0.5 * (u + 1.0)
    wu = 0.5 * wu
    xi = T + scale * u / (1.0 - u)
    w = scale / (1.0 - u) ** 2 * wu
    ai, aip, zeta = airy_scaled(xi)
    X = np.broadcast_to(xi[:, None], (nodes, nodes))
    Y = np.broadcast_to(xi[None, :], (nodes, nodes))
    ks = _scaled_kernel(
        X.copy(), Y.copy(),
        np.broadcast_to(ai[:, None], X.shape).copy(),
        np.broadcast_to(aip[:, None], X.shape).copy(),
        np.broadcast_to(ai[None, :], X.shape).copy(),
        np.broadcast_to(aip[None, :], X.shape).copy(),
    )
    ks = 0.5 * (ks + ks.T)
    d = np.sqrt(w) * np.exp(-zeta)
    A = d[:, None] * ks * d[None, :]
    lam, Q = np.linalg.eigh(A)
    return AiryDiscretization(T, float(scale), nodes, xi, w, zeta, ai, ks, A, lam, Q)


# ---------------------------------------------------------------- Tracy-Widom


def _check_s(s):
    s = np.asarray(s, dtype=complex)
    if np.any(np.abs(s - 1.0) > 1.0 + 1e-12):
        raise DomainError("s must satisfy |s - 1| <= 1")
    return s


def fredholm_tw(T, s=1.0, nodes=DEFAULT_NODES, check=True):
    """``det(1 - s chi K_Airy chi)`` on ``[T, inf)``.

    With ``check`` the computation is repeated on twice the nodes and
    :class:`Divergence` is raised if the two disagree by more than 1e-7.
    """
    s = _check_s(s)
    value = discretize(T, nodes).determinant(s)
    if check:
        fine = discretize(T, 2 * nodes).determinant(s)
        if np.max(np.abs(fine - value)) > DOUBLING_TOL:
            raise Divergence(f"node doubling changed F_TW at T={T} by {np.max(np.abs(fine - value)):.2e}")
    return _as_output(value)


def _as_output(value):
    value = np.asarray(value)
    if np.iscomplexobj(value) and np.all(value.imag == 0):
        value = value.real
    return value[()] if value.ndim == 0 else value


def _jth(func, j, max_j):
    """``sum_{i<j} (-1)^i/i! d^i/ds^i func(s)`` at ``s = 1`` via a Cauchy circle."""
    j = int(j)
    if not 1 <= j <= max_j:
        raise DomainError(f"j must be in 1..{max_j}")
    if j == 1:
        return np.real(func(np.array([1.0 + 0j])))[0]
    coef = taylor_coefficients(func, 1.0, j - 1, CAUCHY_RADIUS, CAUCHY_NODES, offset=0.5)
    return float(np.real(jth_law_from_taylor(coef, j)))


def tw_jth(T, j, nodes=DEFAULT_NODES):
    """Distribution function of the ``j``-th largest Airy point, ``j <= 6``."""
    disc = discretize(T, nodes)
    return _jth(disc.determinant, j, 6)


# ---------------------------------------------------------------- resolvent


def resolvent_apply(disc, s, f):
    """Values of ``(1 - s chi K chi)^{-1} f`` at the discretisation nodes.

    ``f`` is a callable of the node array or an array of node values.  The
    symmetric system is solved through the stored eigendecomposition and the
    solution is rebuilt from the Nystrom interpolation formula.
    """
    fv = np.asarray(f(disc.nodes) if callable(f) else f, dtype=complex)
    s = complex(s)
    if s == 0:
        return fv
    denom = 1.0 - s * disc.eigvals
    if np.min(np.abs(denom)) < 1e-13:
        raise SingularOperator(f"1 - sK is singular for s={s}")
    sw = np.sqrt(disc.weights)
    b = sw * fv
    v = disc.eigvecs @ ((disc.eigvecs.T @ b) / denom)
    resid = np.linalg.norm(v - s * (disc.matrix @ v) - b)
    if resid > 1e-10 * max(np.linalg.norm(b), 1e-300):
        raise SingularOperator(f"resolvent residual {resid:.2e}")
    # u = f + s K W u, with K W u expressed through v = sqrt(w) u
    d = np.exp(-disc.zeta)
    return fv + s * d * (disc.kernel_s @ (d * sw * v))


# ---------------------------------------------------------------- deformed laws


def _map_scale(alpha):
    """Map length that resolves ``C_alpha Ai``, peaked near ``xi = alpha^2`` when ``alpha < 0``."""
    return DEFAULT_SCALE if alpha >= 0 else max(DEFAULT_SCALE, 1.5 * alpha * alpha)


class _RatioEvaluator:
    """``r(T; alpha; s) = 1 - s <(1 - sK)^{-1} C_alpha, Ai>`` for many ``s``.

    The inner product is expanded over the eigenbasis as
    ``p0 + s sum_k g_k b_k / (1 - s lambda_k)``; :meth:`times_det` returns the
    pole-free product ``det(1 - sK) r``.
    """

    def __init__(self, T, alpha, nodes=DEFAULT_NODES):
        self.disc = disc = discretize(T, nodes, _map_scale(alpha))
        cs = c_alpha_scaled(disc.nodes, alpha)
        wc = disc.weights * cs
        self.p0 = float(wc @ disc.ai_s)
        damp = disc.damp
        # g = Q^T (damp * K_s (w C_s)),  b = Q^T (damp * Ai_s)
        self.g = disc.eigvecs.T @ (damp * (disc.kernel_s @ wc))
        self.b = disc.eigvecs.T @ (damp * disc.ai_s)
        self.gb = self.g * self.b

    def ratio(self, s):
        s = np.asarray(s, dtype=complex)[..., None]
        inner = self.p0 + s[..., 0] * np.sum(self.gb / (1.0 - s * self.disc.eigvals), axis=-1)
        return 1.0 - s[..., 0] * inner

    def times_det(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        lam = self.disc.eigvals
        fac = 1.0 - s[:, None] * lam[None, :]
        n = lam.size
        prefix = np.ones((s.size, n + 1), dtype=complex)
        suffix = np.ones((s.size, n + 1), dtype=complex)
        prefix[:, 1:] = np.cumprod(fac, axis=1)
        suffix[:, :-1] = np.cumprod(fac[:, ::-1], axis=1)[:, ::-1]
        leave_one = prefix[:, :-1] * suffix[:, 1:]
        det = prefix[:, -1]
        return det * (1.0 - s * self.p0) - s * s * (leave_one @ self.gb)


def f1(T, alpha, s=1.0, nodes=DEFAULT_NODES):
    """Deformed Airy law ``F_1(T; alpha; s) = F_TW(T; s) (1 - s <R C_alpha, Ai>)``."""
    s = _check_s(s)
    out = _RatioEvaluator(T, float(alpha), nodes).times_det(s.ravel()).reshape(s.shape)
    return _as_output(out)


def _check_alphas(alphas, max_k):
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    k = alphas.size
    if not 1 <= k <= max_k:
        raise DomainError(f"between 1 and {max_k} parameters are supported")
    if k > 1:
        gaps = np.abs(alphas[:, None] - alphas[None, :])[np.triu_indices(k, 1)]
        if np.min(gaps) < ALPHA_MIN_GAP:
            raise ConfluentAlphas(f"alphas must be separated by at least {ALPHA_MIN_GAP}")
    return alphas


def _vandermonde(alphas):
    k = alphas.size
    out = 1.0
    for i in range(k):
        for j in range(i + 1, k):
            out *= alphas[j] - alphas[i]
    return out


def _chebyshev_points(center, half_width, count):
    theta = np.pi * (np.arange(count) + 0.5) / count
    return center + half_width * np.cos(theta)


def _ratio_derivatives(targets, alphas, s, order, center, half_width, points, nodes):
    """Derivatives ``d^l/dT^l r(T; alpha_i; s)`` for ``l <= order`` at ``targets``.

    The ratio is sampled at Chebyshev points of ``[center - h, center + h]``,
    interpolated, and the interpolant is differentiated.  Coefficients below
    the sampling noise are dropped before differentiating.  Returns an array
    of shape ``(len(targets), k, order + 1, len(s))``.
    """
    tpts = _chebyshev_points(center, half_width, points)
    k = alphas.size
    vals = np.empty((points, k, s.size), dtype=complex)
    for p, t in enumerate(tpts):
        for i, a in enumerate(alphas):
            vals[p, i] = _RatioEvaluator(t, a, nodes).ratio(s)
    u = (tpts - center) / half_width
    flat = vals.reshape(points, -1)
    coef = np.polynomial.chebyshev.chebfit(u, flat, points - 1)
    coef = _chop(coef)
    ut = (np.asarray(targets, dtype=float) - center) / half_width
    out = np.empty((ut.size, order + 1, flat.shape[1]), dtype=complex)
    c = coef
    for ell in range(order + 1):
        out[:, ell] = np.polynomial.chebyshev.chebval(ut, c).T / half_width**ell
        c = np.polynomial.chebyshev.chebder(c) if c.shape[0] > 1 else np.zeros_like(c[:1])
    return out.reshape(ut.size, order + 1, k, s.size).transpose(0, 2, 1, 3)


def _chop(coef, rel=1e-14):
    """Drop trailing Chebyshev coefficients at the noise floor."""
    mag = np.max(np.abs(coef), axis=1)
    keep = np.nonzero(mag > rel * mag.max())[0]
    last = keep[-1] + 1 if keep.size else 1
    return coef[: max(last, 1)]


def _fk_values(targets, alphas, s, center, half_width, points, nodes):
    """``F_k`` at every target ``T`` and every ``s``; shape ``(len(targets), len(s))``."""
    k = alphas.size
    if k == 1:
        return np.array([_RatioEvaluator(t, alphas[0], nodes).times_det(s) for t in targets])
    if half_width < 0.25 or points < 2 * k + 2:
        raise WindowTooSmall("Chebyshev window must have half width >= 0.25 and >= 2k+2 points")
    der = _ratio_derivatives(targets, alphas, s, k - 1, center, half_width, points, nodes)
    out = np.empty((len(targets), s.size), dtype=complex)
    for n, t in enumerate(targets):
        # row i, column j: (alpha_i + d/dT)^{j-1} r_i
        mat = np.zeros((s.size, k, k), dtype=complex)
        for i, a in enumerate(alphas):
            for j in range(k):
                mat[:, i, j] = sum(comb(j, ell) * a ** (j - ell) * der[n, i, ell] for ell in range(j + 1))
        det_tw = discretize(t, nodes).determinant(s)
        out[n] = det_tw * np.linalg.det(mat) / _vandermonde(alphas)
    return out


def fk(T, alphas, s=1.0, half_width=CHEB_HALF_WIDTH, points=CHEB_POINTS, nodes=DEFAULT_NODES):
    """Rank-``k`` deformed Airy law ``F_k(T; alpha_1..alpha_k; s)``.

    ``T``-derivatives of ``r = F_1/F_TW`` come from Chebyshev interpolation on
    ``[T - half_width, T + half_width]`` with ``points`` samples.
    """
    alphas = _check_alphas(alphas, 5)
    s = _check_s(s)
    vals = _fk_values([float(T)], alphas, s.ravel(), float(T), half_width, points, nodes)
    return _as_output(vals[0].reshape(s.shape))


def fk_jth(T, j, alphas, half_width=CHEB_HALF_WIDTH, points=CHEB_POINTS, nodes=DEFAULT_NODES):
    """Distribution of the ``j``-th largest point of the deformed Airy process."""
    alphas = _check_alphas(alphas, 5)
    T = float(T)
    return _jth(lambda s: _fk_values([T], alphas, s, T, half_width, points, nodes)[0], j, 6)


# ---------------------------------------------------------------- spiked GUE


def _moment_matrix(T, alphas, s):
    """``[int x^{i-1} e^{-x^2/2 + alpha_j x} (1 - s chi_(T,inf)) dx]`` without ``e^{alpha^2/2}``."""
    k = alphas.size
    return np.column_stack([spiked_moments(k, a, T, s, centered=True) for a in alphas])


def gk(T, alphas, s=1.0):
    """Top-eigenvalue generating function of the ``k x k`` GUE with external source."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    if not 1 <= alphas.size <= 8:
        raise DomainError("between 1 and 8 parameters are supported")
    _check_alphas(alphas, 8)
    T = float(T)
    den = np.linalg.det(_moment_matrix(-np.inf, alphas, 0.0))
    if den == 0 or not np.isfinite(den):
        raise SingularDenominator("moment determinant vanished for distinct alphas")
    s_arr = np.asarray(s, dtype=complex)
    out = np.array([np.linalg.det(_moment_matrix(T, alphas, sv)) for sv in s_arr.ravel()])
    return _as_output((out / den).reshape(s_arr.shape))


def _hankel_gk(T, k, s):
    """``G_k`` at ``alpha = 0`` as a ratio of Hankel determinants of Gaussian moments."""
    idx = np.add.outer(np.arange(k), np.arange(k))
    den = np.linalg.det(spiked_moments(2 * k - 1, 0.0, -np.inf, 0.0, centered=True)[idx])
    out = np.empty(np.size(s), dtype=complex)
    for n, sv in enumerate(np.ravel(s)):
        out[n] = np.linalg.det(spiked_moments(2 * k - 1, 0.0, T, sv, centered=True)[idx])
    return out / den


def _perturbed_gk(T, k, s, eps):
    """Richardson limit of ``G_k(T; eps (1..k); s)`` as ``eps -> 0``; accurate for small ``k`` only."""
    base = np.arange(1, k + 1, dtype=float)
    coarse = np.array([gk(T, eps * base, sv) for sv in np.ravel(s)])
    fine = np.array([gk(T, 0.5 * eps * base, sv) for sv in np.ravel(s)])
    return 2.0 * fine - coarse


def gk_jth(T, j, k, alphas=None, method="hankel", eps=1e-3):
    """Distribution of the ``j``-th largest eigenvalue of the spiked ``k x k`` GUE.

    With ``alphas`` omitted the unspiked GUE is meant.  ``method="hankel"``
    evaluates that confluent point exactly through Hankel determinants;
    ``method="perturb"`` uses the micro-perturbation ``eps (1..k)`` with
    Richardson extrapolation (reliable only for ``k <= 3``).
    """
    k = int(k)
    if not 1 <= k <= 6:
        raise DomainError("k must be in 1..6")
    if int(j) > k:
        raise DomainError("j must not exceed k")
    T = float(T)
    if alphas is not None:
        alphas = _check_alphas(alphas, 6)
        if alphas.size != k:
            raise DomainError("len(alphas) must equal k")
        return _jth(lambda s: np.atleast_1d(gk(T, alphas, s)), j, k)
    if method == "hankel":
        return _jth(lambda s: _hankel_gk(T, k, s), j, k)
    if method == "perturb":
        return _jth(lambda s: _perturbed_gk(T, k, s, eps), j, k)
    raise DomainError(f"unknown method {method!r}")


def normal_cdf(T):
    """Standard normal distribution function."""
    out = special.ndtr(np.asarray(T, dtype=float))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------- curves


@dataclass(frozen=True)
class LawCurve:
    """A distribution function tabulated on a grid of ``T``."""

    law: str
    params: dict
    T: np.ndarray
    values: np.ndarray

    def cdf(self, t):
        """Linear interpolant of the tabulated values, clipped to ``[0, 1]``."""
        return np.clip(np.interp(t, self.T, self.values), 0.0, 1.0)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["T", "value"])
            for t, v in zip(self.T, self.values):
                writer.writerow([f"{t:.17g}", f"{v:.17g}"])

    @classmethod
    def from_csv(cls, path, law="", params=None):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(law, dict(params or {}), data[:, 0], data[:, 1])


_LAWS = ("tw", "f1", "fk", "gk", "normal")


def law_curve(law, T_grid, alphas=(), j=1, s=1.0, nodes=DEFAULT_NODES):
    """Tabulate one law on ``T_grid``.

    ``law`` is one of ``tw`` (``j``-th Tracy-Widom), ``fk`` (``j``-th deformed
    Airy law with ``alphas``), ``gk`` (``j``-th spiked GUE law; all-zero
    ``alphas`` of length ``k`` select the unspiked ``k x k`` GUE) and
    ``normal``.  ``s`` other than 1 is honoured for ``tw`` with ``j = 1`` only.
    """
    T_grid = np.asarray(T_grid, dtype=float)
    alphas = tuple(float(a) for a in alphas)
    params = {"alphas": list(alphas), "j": int(j), "s": s}
    if law == "normal":
        values = normal_cdf(T_grid)
    elif law == "tw":
        if j == 1:
            values = np.array([np.real(discretize(t, nodes).determinant(s)) for t in T_grid])
        else:
            values = np.array([tw_jth(t, j, nodes) for t in T_grid])
    elif law in ("f1", "fk"):
        values = _fk_curve(T_grid, np.array(alphas or (0.0,)), j, nodes)
    elif law == "gk":
        if alphas and any(alphas):
            values = np.array([gk_jth(t, j, len(alphas), alphas) for t in T_grid])
        else:
            k = max(len(alphas), 1)
            values = np.array([gk_jth(t, j, k) for t in T_grid])
    else:
        raise DomainError(f"law must be one of {_LAWS}")
    return LawCurve(law, params, T_grid, np.asarray(values, dtype=float))


def _fk_curve(T_grid, alphas, j, nodes, half_width=CHEB_HALF_WIDTH, points=CHEB_POINTS):
    """``F_k^{(j)}`` on a grid, sharing one Chebyshev window per unit of ``T``."""
    alphas = _check_alphas(alphas, 5)
    out = np.empty(T_grid.size)
    if alphas.size == 1:
        for n, t in enumerate(T_grid):
            out[n] = _jth(_RatioEvaluator(t, alphas[0], nodes).times_det, j, 6)
        return out
    centers = np.round(T_grid)
    for c in np.unique(centers):
        sel = np.nonzero(centers == c)[0]
        targets = T_grid[sel]
        if j == 1:
            vals = _fk_values(targets, alphas, np.array([1.0 + 0j]), c, half_width, points, nodes)
            out[sel] = vals[:, 0].real
        else:
            table = {}

            def func(s, targets=targets, c=c, table=table):
                table["v"] = _fk_values(targets, alphas, s, c, half_width, points, nodes)
                return table["v"].T

            coef = taylor_coefficients(func, 1.0, j - 1, CAUCHY_RADIUS, CAUCHY_NODES, offset=0.5)
            out[sel] = np.real(jth_law_from_taylor(coef, j))
    return out
