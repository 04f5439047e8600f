"""Quadrature rules and special functions.

Gauss-Legendre rules, the Airy function and its derivative (optionally in
exponentially scaled form), the contour integral ``C_alpha``, truncated
Gaussian moments and Cauchy-integral Taylor coefficients.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError, InvalidInterval, NumericalError, PoleTooClose

__all__ = [
    "QuadratureRule",
    "ContourEval",
    "gauss_legendre",
    "composite_gauss_legendre",
    "airy_ai",
    "airy_ai_prime",
    "airy_scaled",
    "airy_scale_exponent",
    "c_alpha",
    "c_alpha_scaled",
    "spiked_moment",
    "spiked_moments",
    "taylor_coefficients",
    "jth_law_from_taylor",
]

AIRY_LIMIT = 50.0
C_ALPHA_XI_LIMIT = 40.0
C_ALPHA_ALPHA_LIMIT = 10.0


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights of an interpolatory rule on ``[a, b]``."""

    nodes: np.ndarray
    weights: np.ndarray
    a: float
    b: float

    def integrate(self, f):
        return np.dot(self.weights, f(self.nodes))


@lru_cache(maxsize=64)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n, a=-1.0, b=1.0):
    """Gauss-Legendre rule with ``n`` nodes mapped to ``[a, b]``.

    Exact for polynomials of degree ``2n - 1``.
    """
    n = int(n)
    if n < 1:
        raise InvalidInterval("need at least one node")
    a = float(a)
    b = float(b)
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise InvalidInterval(f"invalid interval [{a}, {b}]")
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return QuadratureRule(half * x + 0.5 * (a + b), half * w, a, b)


def composite_gauss_legendre(breaks, n):
    """Concatenate ``n``-point rules on consecutive intervals of ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    if breaks.ndim != 1 or breaks.size < 2 or np.any(np.diff(breaks) <= 0):
        raise InvalidInterval("breakpoints must be strictly increasing")
    x, w = _leggauss(int(n))
    lo = breaks[:-1, None]
    half = 0.5 * np.diff(breaks)[:, None]
    nodes = (lo + half * (x[None, :] + 1.0)).ravel()
    weights = (half * w[None, :]).ravel()
    return QuadratureRule(nodes, weights, float(breaks[0]), float(breaks[-1]))


# ---------------------------------------------------------------- Airy


def _check_airy_domain(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > AIRY_LIMIT) or np.any(~np.isfinite(x)):
        raise DomainError(f"Airy evaluation restricted to |x| <= {AIRY_LIMIT}")
    return x


def airy_ai(x):
    """Airy function Ai on ``|x| <= 50``."""
    x = _check_airy_domain(x)
    ai = special.airy(x)[0]
    return ai if ai.ndim else float(ai)


def airy_ai_prime(x):
    """Derivative Ai' on ``|x| <= 50``."""
    x = _check_airy_domain(x)
    aip = special.airy(x)[1]
    return aip if aip.ndim else float(aip)


def airy_scale_exponent(x):
    """Exponent ``zeta(x) = (2/3) x^{3/2}`` for ``x > 0`` and zero otherwise."""
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, (2.0 / 3.0) * np.abs(x) ** 1.5, 0.0)


def airy_scaled(x):
    """Return ``(Ai(x) e^{zeta}, Ai'(x) e^{zeta}, zeta)`` for any real ``x``.

    The scaling keeps far right-tail values representable; on ``x <= 0``
    ``zeta`` is zero and the plain values are returned.
    """
    x = np.asarray(x, dtype=float)
    zeta = airy_scale_exponent(x)
    pos = x > 0
    ai = np.empty_like(x)
    aip = np.empty_like(x)
    if np.any(pos):
        eai, eaip, _, _ = special.airye(x[pos])
        ai[pos] = eai
        aip[pos] = eaip
    if np.any(~pos):
        a, ap, _, _ = special.airy(x[~pos])
        ai[~pos] = a
        aip[~pos] = ap
    return ai, aip, zeta


# ---------------------------------------------------------------- C_alpha


@dataclass(frozen=True)
class ContourEval:
    """Bookkeeping for one contour evaluation of ``C_alpha``.

    ``height`` is the imaginary part of the horizontal part of the path and
    ``residue_added`` records whether the pole ``i*alpha`` fell below the
    computed path, in which case its residue was added back.
    """

    alpha: float
    xi: float
    value: float
    height: float
    node_count: int
    residue_added: bool
    ray_angle: float = np.pi / 6


_RAY_RIGHT = np.exp(1j * np.pi / 6)
_RAY_LEFT = np.exp(5j * np.pi / 6)
_PANEL = 32
_LOG_TINY = np.log(1e-18)


def _phase(z, xi):
    return 1j * z**3 / 3.0 + 1j * xi * z


def _ray_length(start, direction, xi, ref):
    t = np.linspace(0.0, 40.0, 4001)
    re = _phase(start + t * direction, xi).real
    above = np.nonzero(re > ref + _LOG_TINY)[0]
    last = t[above[-1]] if above.size else 0.0
    return max(last + 1.0, 2.0)


def _panel_rule(length, panels, refine):
    k = max(1, int(np.ceil(panels))) * refine
    return composite_gauss_legendre(np.linspace(0.0, length, k + 1), _PANEL)


def _contour_integral(xi, alpha, height, half_width, refine):
    left = -half_width + 1j * height
    right = half_width + 1j * height
    ref = max(_phase(left, xi).real, _phase(right, xi).real, _phase(1j * height, xi).real)
    total = 0.0 + 0.0j
    count = 0

    def f(z):
        return np.exp(_phase(z, xi)) / (alpha + 1j * z)

    for start, direction, sign in ((left, _RAY_LEFT, -1.0), (right, _RAY_RIGHT, 1.0)):
        length = _ray_length(start, direction, xi, ref)
        rule = _panel_rule(length, length, refine)
        z = start + rule.nodes * direction
        total += sign * direction * np.dot(rule.weights, f(z))
        count += rule.nodes.size
    if half_width > 0:
        width = 2.0 * half_width
        # oscillation count of the phase along the segment decides the panels
        panels = 2.0 + width * (abs(xi) + half_width**2) / 6.0
        rule = _panel_rule(width, panels, refine)
        z = left + rule.nodes
        total += np.dot(rule.weights, f(z))
        count += rule.nodes.size
    return total / (2.0 * np.pi), count


def _c_alpha_eval(xi, alpha, refine=1):
    if xi >= 0:
        half_width = 0.0
        height = np.sqrt(xi)
        close = 0.85 * (alpha - height) if alpha >= height else height - alpha
    else:
        half_width = np.sqrt(-xi)
        height = -0.5
        close = abs(alpha - height)
    if close < 0.3:
        height = alpha - 0.5
        close = 0.5 * (0.85 if half_width == 0 else 1.0)
    if close < 0.1:
        raise PoleTooClose(f"contour cannot avoid the pole at alpha={alpha}")
    integral, count = _contour_integral(xi, alpha, height, half_width, refine)
    below = alpha < height
    value = integral
    if below:
        value = value + np.exp(alpha**3 / 3.0 - alpha * xi)
    scale = 1.0 + abs(value)
    if abs(value.imag) > 1e-8 * scale:
        raise NumericalError(f"C_alpha lost accuracy: imaginary part {value.imag:.3e}")
    return ContourEval(float(alpha), float(xi), float(value.real), float(height), count, bool(below))


def c_alpha(xi, alpha, refine=1, full_output=False):
    """Contour function ``C_alpha(xi)``.

    Evaluates ``(1/2 pi) int exp(i z^3/3 + i xi z) dz / (alpha + i z)`` on a
    path from ``inf e^{5 pi i/6}`` to ``inf e^{pi i/6}`` passing below the
    pole ``z = i alpha``.  The path is bent through the saddle points of the
    exponent and integrated with 32-node Gauss-Legendre panels; ``refine``
    multiplies the panel count.

    Parameters
    ----------
    xi : float
        Argument, ``|xi| <= 40``.
    alpha : float
        Pole parameter, ``|alpha| <= 10``.
    refine : int
        Panel multiplier (2 doubles every panel count).
    full_output : bool
        Return the :class:`ContourEval` record instead of the value.

    Returns
    -------
    float or ContourEval
    """
    xi = float(xi)
    alpha = float(alpha)
    if abs(xi) > C_ALPHA_XI_LIMIT:
        raise DomainError(f"|xi| must be <= {C_ALPHA_XI_LIMIT}")
    if abs(alpha) > C_ALPHA_ALPHA_LIMIT:
        raise DomainError(f"|alpha| must be <= {C_ALPHA_ALPHA_LIMIT}")
    ev = _c_alpha_eval(xi, alpha, int(refine))
    return ev if full_output else ev.value


def c_alpha_scaled(xi, alpha):
    """Return ``C_alpha(xi) * exp(-zeta(xi))`` for an array of ``xi``.

    Beyond ``xi = 40`` the path integral is below ``exp(-168)`` relative to
    the Airy scale and only the pole contribution survives; it is combined
    with the scaling exponent in log space so neither factor overflows.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    zeta = airy_scale_exponent(xi)
    out = np.empty_like(xi)
    for k, x in enumerate(xi):
        if x <= C_ALPHA_XI_LIMIT:
            out[k] = _c_alpha_eval(x, alpha).value * np.exp(-zeta[k])
        elif alpha < np.sqrt(x):
            out[k] = np.exp(alpha**3 / 3.0 - alpha * x - zeta[k])
        else:
            out[k] = 0.0
    return out


# ---------------------------------------------------------------- moments


def spiked_moments(imax, alpha, T=-np.inf, s=0.0, centered=False):
    """Vector of ``int x^{i-1} exp(-x^2/2 + alpha x) (1 - s chi_(T,inf)) dx``.

    Entries ``i = 1..imax``.  Built from the exact three-term recursion of
    Gaussian moments; the tail (or the lower part when ``T < alpha``) starts
    from a complementary error function, so no quadrature is involved.
    With ``centered=True`` the common factor ``exp(alpha^2/2)`` is dropped.
    """
    imax = int(imax)
    alpha = float(alpha)
    s = complex(s)
    full = np.empty(imax)
    full[0] = np.sqrt(2 * np.pi)
    if imax > 1:
        full[1] = alpha * full[0]
    for k in range(1, imax - 1):
        full[k + 1] = alpha * full[k] + k * full[k - 1]
    if T == -np.inf or s == 0:
        out = full.astype(complex)
        if T == -np.inf:
            out = (1.0 - s) * out
    elif T == np.inf:
        out = full.astype(complex)
    else:
        T = float(T)
        bump = np.exp(-0.5 * (T - alpha) ** 2)
        part = np.empty(imax)
        if T >= alpha:
            part[0] = np.sqrt(np.pi / 2) * special.erfc((T - alpha) / np.sqrt(2))
            sign = 1.0
        else:
            part[0] = np.sqrt(np.pi / 2) * special.erfc((alpha - T) / np.sqrt(2))
            sign = -1.0
        tk = 1.0
        for k in range(imax - 1):
            prev = k * part[k - 1] if k else 0.0
            part[k + 1] = alpha * part[k] + prev + sign * tk * bump
            tk *= T
        if T >= alpha:
            out = full - s * part
        else:
            out = (1.0 - s) * full + s * part
    if not centered:
        out = out * np.exp(0.5 * alpha**2)
    return out


def spiked_moment(i, alpha, T=-np.inf, s=0.0):
    """Single truncated Gaussian moment; see :func:`spiked_moments`."""
    i = int(i)
    if not 1 <= i <= 20:
        raise DomainError("moment index must be in 1..20")
    if abs(alpha) > 20:
        raise DomainError("|alpha| must be <= 20")
    return complex(spiked_moments(i, alpha, T, s)[i - 1])


# ---------------------------------------------------------------- Cauchy


def taylor_coefficients(f, center, order, radius=0.5, nodes=64, offset=0.0):
    """Taylor coefficients ``f^{(k)}(center)/k!`` for ``k = 0..order``.

    ``f`` maps an array of complex points to an array of values (possibly
    with trailing dimensions).  Uses the trapezoid rule on the circle
    ``|z - center| = radius``, spectrally accurate for analytic ``f``.
    ``offset`` rotates the nodes by that fraction of the node spacing;
    ``offset=0.5`` keeps every node off the real axis.
    """
    theta0 = 2 * np.pi * offset / nodes
    theta = theta0 + 2 * np.pi * np.arange(nodes) / nodes
    z = center + radius * np.exp(1j * theta)
    vals = np.asarray(f(z))
    coef = np.fft.fft(vals, axis=0) / nodes
    k = np.arange(order + 1)
    scale = radius ** (-k.astype(float)) * np.exp(-1j * k * theta0)
    return coef[: order + 1] * scale.reshape((-1,) + (1,) * (coef.ndim - 1))


def jth_law_from_taylor(coef, j):
    """``sum_{i<j} (-1)^i/i! f^{(i)}(1)`` from Taylor coefficients at 1."""
    signs = (-1.0) ** np.arange(j)
    return np.tensordot(signs, coef[:j], axes=(0, 0))

