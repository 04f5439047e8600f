"""Jump probabilities at secondary critical and jump-type critical spikes.

For a one-cut equilibrium measure on ``(e_left, e)`` the functions
``M_j`` and ``M~_j`` have closed forms in ``gamma(x) = ((x - e_left)/(x - e))^{1/4}``.
Determinants of matrices of their derivatives, paired with exponential
Vandermonde-type matrices in the spike offsets, give the probabilities
``p_m`` that decide how many eigenvalues jump between two maximisers.
"""

import json
from dataclasses import asdict, dataclass
from math import comb, factorial

import numpy as np

from .errors import CaseOutOfRange, ConfluentAlphas, DomainError, HypothesisViolated, ZeroExponent

__all__ = [
    "OneCutFrame",
    "JumpScaling",
    "TransitionResult",
    "m_func",
    "m_tilde_func",
    "m_derivative",
    "frakP",
    "frakP_tilde",
    "frakQ",
    "jump_scaling",
    "jump_scaling_critical",
    "p_m",
    "p_tilde_m",
    "mixture_prediction",
]

_CAUCHY_NODES = 48


@dataclass(frozen=True)
class OneCutFrame:
    """Endpoints ``left < right`` of a one-interval support."""

    left: float
    right: float

    def __post_init__(self):
        if not self.left < self.right:
            raise DomainError("frame endpoints must satisfy left < right")

    @classmethod
    def from_equilibrium(cls, eq):
        return cls(float(eq.left), float(eq.right))

    @property
    def norm(self):
        return np.sqrt(2.0 / (np.pi * (self.right - self.left)))

    def gamma(self, x):
        x = np.asarray(x)
        return ((x - self.left) / (x - self.right)) ** 0.25


def _check_outside(frame, x):
    xr = np.real(np.asarray(x))
    if np.any(xr <= frame.right):
        raise DomainError("evaluation point must lie to the right of the support")


def _m_raw(frame, j, z):
    g = frame.gamma(z)
    ratio = (g - 1 / g) / (g + 1 / g)
    return frame.norm * 0.5 * (g + 1 / g) * ratio**j


def _m_tilde_raw(frame, j, z):
    # -i times the tilde function: the factor (g - 1/g)/(-2i) becomes (g - 1/g)/2
    g = frame.gamma(z)
    ratio = (g - 1 / g) / (g + 1 / g)
    return frame.norm * 0.5 * (g - 1 / g) * ratio ** (-j)


def m_func(frame, j, x):
    """``M_j(x)`` for ``x > e``; positive there."""
    _check_outside(frame, x)
    out = _m_raw(frame, int(j), np.asarray(x, dtype=float))
    return out if np.ndim(out) else float(out)


def m_tilde_func(frame, j, x):
    """``-i M~_j(x)`` for ``x > e``, the real positive normalisation of ``M~_j``."""
    _check_outside(frame, x)
    out = _m_tilde_raw(frame, int(j), np.asarray(x, dtype=float))
    return out if np.ndim(out) else float(out)


def m_derivative(frame, j, x, order, tilde=False, method="cauchy", step=None):
    """``order``-th derivative of ``M_j`` (or ``-i M~_j``) at ``x > e``.

    ``method="cauchy"`` integrates over a circle of radius ``(x - e)/2``,
    where the closed form is analytic.  ``method="richardson"`` uses a
    central difference of the requested order at steps ``h`` and ``h/2``
    combined by Richardson extrapolation.
    """
    _check_outside(frame, x)
    raw = _m_tilde_raw if tilde else _m_raw
    x = float(x)
    order = int(order)
    if order == 0:
        return float(raw(frame, j, x))
    if method == "cauchy":
        radius = 0.5 * (x - frame.right)
        theta = 2 * np.pi * (np.arange(_CAUCHY_NODES) + 0.5) / _CAUCHY_NODES
        z = x + radius * np.exp(1j * theta)
        vals = raw(frame, j, z)
        coef = np.mean(vals * np.exp(-1j * order * theta)) / radius**order
        return float(np.real(coef) * factorial(order))
    if method == "richardson":
        h = step if step is not None else min(0.02, 0.03 * (x - frame.right) / (order + 1))

        def central(hh):
            ks = np.arange(order + 1)
            pts = x + (0.5 * order - ks) * hh
            w = np.array([(-1.0) ** k * comb(order, k) for k in ks])
            return float(w @ raw(frame, j, pts)) / hh**order

        return (4.0 * central(0.5 * h) - central(h)) / 3.0
    raise DomainError(f"unknown derivative method {method!r}")


def _derivative_block(frame, x, mm, count, tilde, method):
    """Columns ``d^r/dx^r M_i(x)``, ``i = 1..mm``, ``r = 0..count-1``."""
    out = np.empty((mm, count))
    for i in range(1, mm + 1):
        for r in range(count):
            out[i - 1, r] = m_derivative(frame, i, x, r, tilde=tilde, method=method)
    return out


def frakP(frame, a, b, mm, j, method="cauchy"):
    """``mm x mm`` matrix of ``M_i`` derivatives: orders ``0..mm-j-1`` at ``a``, ``0..j-1`` at ``b``."""
    mm, j = int(mm), int(j)
    if not 0 <= j <= mm:
        raise DomainError("j must be in 0..mm")
    if a == b and 0 < j < mm:
        raise DomainError("a and b must be distinct")
    _check_outside(frame, [a, b])
    return np.hstack([
        _derivative_block(frame, a, mm, mm - j, False, method),
        _derivative_block(frame, b, mm, j, False, method),
    ])


def frakP_tilde(frame, a, b, mm, j, method="cauchy", reflect=True):
    """Mixed matrix: ``-i M~_i`` derivatives at ``a`` (``mm - j`` columns), ``M_i`` derivatives at ``b``.

    With ``reflect`` the ``r``-th derivative columns of the tilde block are
    multiplied by ``(-1)^r``, i.e. they are derivatives in ``-x``.  This is
    the normalisation under which every product ``det P~ det Q~`` is
    positive; ``reflect=False`` gives the literal columns.
    """
    mm, j = int(mm), int(j)
    if not 0 <= j <= mm:
        raise DomainError("j must be in 0..mm")
    _check_outside(frame, [a, b])
    left = _derivative_block(frame, a, mm, mm - j, True, method)
    if reflect:
        left = left * (-1.0) ** np.arange(mm - j)
    return np.hstack([left, _derivative_block(frame, b, mm, j, False, method)])


def frakQ(c, mm, j, alphas):
    """Rows ``(1, alpha, .., alpha^{mm-j-1}, e^{c alpha}(1, alpha, .., alpha^{j-1}))``."""
    alphas = np.asarray(alphas, dtype=float)
    mm, j = int(mm), int(j)
    if alphas.size != mm:
        raise DomainError("need exactly mm alphas")
    if not 0 <= j <= mm:
        raise DomainError("j must be in 0..mm")
    if c == 0:
        raise DomainError("c must be nonzero")
    if mm > 1 and np.min(np.abs(np.subtract.outer(alphas, alphas))[np.triu_indices(mm, 1)]) == 0:
        raise ConfluentAlphas("alphas must be distinct")
    poly = alphas[:, None] ** np.arange(mm - j)[None, :]
    expo = np.exp(c * alphas)[:, None] * alphas[:, None] ** np.arange(j)[None, :]
    return np.hstack([poly, expo])


# ---------------------------------------------------------------- scalings


@dataclass(frozen=True)
class JumpScaling:
    """Spike scaling ``a_k(n) = a - q log(K n)/n + alpha_k/n``."""

    m: int
    q: float
    K: float
    base: float = 0.0

    def spikes(self, n, alphas):
        alphas = np.asarray(alphas, dtype=float)
        return self.base - self.q * np.log(self.K * n) / n + alphas / n


def _scaling(mm, m, gap, curv_left, curv_right, base):
    mm, m = int(mm), int(m)
    if not 1 <= m <= mm:
        raise DomainError("m must be in 1..mm")
    if gap <= 0:
        raise DomainError("the two points must be ordered")
    if curv_left <= 0 or curv_right <= 0:
        raise DomainError("curvatures must have the required signs")
    expo = mm - 2 * m + 1
    q = expo / gap
    if expo == 0:
        raise ZeroExponent("mm = 2m - 1 leaves the scaling constant undefined")
    inner = factorial(mm - m) / factorial(m - 1) * curv_left ** (mm - m + 0.5) / curv_right ** (m - 0.5)
    return JumpScaling(m, q, inner ** (1.0 / expo), base)


def jump_scaling(x1, x2, G2_1, G2_2, mm, m, a=0.0):
    """Scaling at a secondary critical value with maximisers ``x1 < x2``."""
    if G2_1 >= 0 or G2_2 >= 0:
        raise DomainError("G'' must be negative at both maximisers")
    return _scaling(mm, m, x2 - x1, -G2_1, -G2_2, a)


def jump_scaling_critical(c_ac, x0_ac, H2, G2, mm, m, a_c=0.0):
    """Scaling at a jump-type critical value, ``H''(c) > 0`` and ``G''(x0) < 0``."""
    if H2 <= 0 or G2 >= 0:
        raise DomainError("need H''(c) > 0 and G''(x0) < 0")
    return _scaling(mm, m, x0_ac - c_ac, H2, -G2, a_c)


# ---------------------------------------------------------------- probabilities


@dataclass(frozen=True)
class TransitionResult:
    """Jump probability ``p`` and the four determinants that define it."""

    p: float
    det_P_prev: float
    det_P: float
    det_Q_prev: float
    det_Q: float
    odds: float
    m: int
    mm: int

    def to_json(self):
        return json.dumps({k: (float(f"{v:.17g}") if isinstance(v, float) else v) for k, v in asdict(self).items()})

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def _check_descending(alphas):
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size > 1 and not np.all(np.diff(alphas) < 0):
        raise ConfluentAlphas("alphas must be strictly descending")
    return alphas


def _assemble(p_prev, p_cur, q_prev, q_cur, m, mm, check_positive):
    dpp, dp = float(np.linalg.det(p_prev)), float(np.linalg.det(p_cur))
    dqp, dq = float(np.linalg.det(q_prev)), float(np.linalg.det(q_cur))
    lo, hi = dpp * dqp, dp * dq
    if check_positive and (lo <= 0 or hi <= 0):
        raise HypothesisViolated("determinant products must be positive")
    odds = hi / lo
    return TransitionResult(1.0 / (1.0 + odds), dpp, dp, dqp, dq, odds, int(m), int(mm))


def p_m(frame, x1, x2, G2_1, G2_2, mm, m, alphas, method="cauchy"):
    """Probability that only ``m - 1`` eigenvalues sit at the far maximiser ``x2``.

    ``G2_1`` and ``G2_2`` are only validated here; they enter through
    :func:`jump_scaling`.
    """
    alphas = _check_descending(alphas)
    if not x1 < x2:
        raise DomainError("need x1 < x2")
    if G2_1 >= 0 or G2_2 >= 0:
        raise DomainError("G'' must be negative at both maximisers")
    mm, m = int(mm), int(m)
    if not 1 <= m <= mm:
        raise DomainError("m must be in 1..mm")
    c = x2 - x1
    return _assemble(
        frakP(frame, x1, x2, mm, m - 1, method), frakP(frame, x1, x2, mm, m, method),
        frakQ(c, mm, m - 1, alphas), frakQ(c, mm, m, alphas),
        m, mm, check_positive=False,
    )


def p_tilde_m(frame, c_ac, x0_ac, H2, G2, mm, m, alphas, method="cauchy", reflect=True):
    """Jump probability at a jump-type critical value; positivity of each product is enforced."""
    alphas = _check_descending(alphas)
    if not frame.right < c_ac < x0_ac:
        raise DomainError("need e < c(a_c) < x0(a_c)")
    if H2 <= 0 or G2 >= 0:
        raise DomainError("need H''(c) > 0 and G''(x0) < 0")
    mm, m = int(mm), int(m)
    if not 1 <= m <= mm:
        raise DomainError("m must be in 1..mm")
    c = x0_ac - c_ac
    return _assemble(
        frakP_tilde(frame, c_ac, x0_ac, mm, m - 1, method, reflect),
        frakP_tilde(frame, c_ac, x0_ac, mm, m, method, reflect),
        frakQ(c, mm, m - 1, alphas), frakQ(c, mm, m, alphas),
        m, mm, check_positive=True,
    )


# ---------------------------------------------------------------- mixtures


def _gue_law(ell, k):
    """``G^{(ell)}_k``; the empty ensemble and ``ell > k`` give the constant 1."""
    from .laws import gk_jth

    if k == 0 or ell > k:
        return lambda T: 1.0
    return lambda T: gk_jth(T, ell, k)


def mixture_prediction(result, k, which_point, kind="secondary"):
    """Predicted limiting distribution of the ``k``-th largest eigenvalue.

    ``kind="secondary"``: ``which_point`` is ``"x2"`` (far maximiser) or
    ``"x1"`` (near maximiser).  ``kind="critical"``: ``which_point`` is
    ``"x0"`` (detached point) or ``"edge"`` (soft edge, Tracy-Widom scale).
    Returns a callable ``T -> probability``.
    """
    p, m, mm = result.p, result.m, result.mm
    k = int(k)
    if kind == "secondary":
        if which_point == "x2" and 1 <= k < m:
            a, b = _gue_law(k, m - 1), _gue_law(k, m)
            return lambda T: p * a(T) + (1 - p) * b(T)
        if which_point == "x2" and k == m:
            b = _gue_law(m, m)
            return lambda T: p + (1 - p) * b(T)
        if which_point == "x1" and k == m:
            a = _gue_law(1, mm - m + 1)
            return lambda T: p * a(T)
        if which_point == "x1" and m < k <= mm:
            a, b = _gue_law(k - m + 1, mm - m + 1), _gue_law(k - m, mm - m)
            return lambda T: p * a(T) + (1 - p) * b(T)
    elif kind == "critical":
        if which_point == "x0" and 1 <= k < m:
            a, b = _gue_law(k, m - 1), _gue_law(k, m)
            return lambda T: p * a(T) + (1 - p) * b(T)
        if which_point == "x0" and k == m:
            b = _gue_law(m, m)
            return lambda T: p + (1 - p) * b(T)
        if which_point == "edge" and k == m:
            from .laws import fredholm_tw

            return lambda T: p * float(np.real(fredholm_tw(T, 1.0, check=False)))
    raise CaseOutOfRange(f"no prediction for k={k}, point={which_point!r}, kind={kind!r}")
