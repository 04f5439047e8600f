"""Equilibrium measure and phase diagram of a one-cut potential.

For a confining polynomial potential ``V`` the equilibrium measure of the
log-gas ``exp(-n Tr V)`` is supported on ``[left, right]``.  Everything here
is built from two polynomial objects: ``V`` itself and the polynomial

    h(z) = int_0^pi (V'(z) - V'(y)) / (z - y) dtheta,   y = c + r cos(theta),

with ``c``, ``r`` the centre and half-width of the support.  The density is
``sqrt((right - x)(x - left)) h(x) / (2 pi^2)`` and, to the right of the
support, ``g'(z) = V'(z)/2 - h(z) sqrt((z - right)(z - left)) / (2 pi)``.

A spike ``a`` enters through ``G(x; a) = g(x) - V(x) + a x`` (outlier
candidates) and ``H(x; a) = -g(x) + a x + l`` with ``l`` the Robin constant.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate, optimize

from .errors import (
    DomainError,
    FlatMaximum,
    MultiCut,
    NoConvergence,
    NonConfining,
    SearchBoundsExceeded,
    ValidationError,
)
from .quadrature import gauss_legendre

__all__ = [
    "Potential",
    "EquilibriumData",
    "OutlierLocation",
    "PhasePortrait",
    "solve_equilibrium",
    "g_func",
    "g_prime",
    "big_G",
    "big_H",
    "big_G_second",
    "c_of_a",
    "critical_ac",
    "x0_of_a",
    "local_maxima",
    "scan_secondary_criticals",
    "phase_portrait",
]

TIE_TOL = 1e-9
FLAT_TOL = 1e-6
_CHEB_NODES = 96


class Potential:
    """Polynomial confining potential ``V(x) = sum_k coef[k] x^k``.

    Parameters
    ----------
    coefficients : sequence of float
        Ascending coefficients.  The degree must be even with a positive
        leading coefficient.
    name : str, optional
        Label used in reports.
    convex_beyond_edge : bool, optional
        Hint; when omitted convexity right of the support is computed.
    """

    def __init__(self, coefficients, name=None, convex_beyond_edge=None):
        coef = np.trim_zeros(np.asarray(coefficients, dtype=float), "b")
        if coef.size < 3 or (coef.size - 1) % 2 or coef[-1] <= 0:
            raise NonConfining("potential must be a polynomial of even degree >= 2 "
                               "with positive leading coefficient")
        if not np.all(np.isfinite(coef)):
            raise NonConfining("non-finite coefficient")
        self.coef = coef
        self.d1 = P.polyder(coef)
        self.d2 = P.polyder(coef, 2)
        self.name = name or "polynomial"
        self.convex_beyond_edge = convex_beyond_edge
        self._check_growth()

    @classmethod
    def gaussian(cls):
        return cls([0.0, 0.0, 0.5], name="gaussian", convex_beyond_edge=True)

    @classmethod
    def quartic(cls, c4=0.25, c2=0.0):
        return cls([0.0, 0.0, c2, 0.0, c4], name="quartic")

    @property
    def degree(self):
        return self.coef.size - 1

    @property
    def is_gaussian(self):
        return self.degree == 2 and np.allclose(self.coef, [0.0, 0.0, 0.5], atol=0)

    def V(self, x):
        return P.polyval(x, self.coef)

    def dV(self, x):
        return P.polyval(x, self.d1)

    def d2V(self, x):
        return P.polyval(x, self.d2)

    def growth_bound(self):
        """Radius beyond which ``V(x) > 2|x| + 1``."""
        coef = self.coef
        lead = coef[-1]
        # Cauchy-type bound on the roots of V(x) -/+ 2x - 1
        rest = np.abs(coef[:-1]).copy()
        rest[0] += 1.0
        rest[1] += 2.0
        return 1.0 + float(np.max(rest) / lead)

    def _check_growth(self):
        R = self.growth_bound()
        x = np.concatenate([np.linspace(R, 4 * R + 10, 200), -np.linspace(R, 4 * R + 10, 200)])
        if np.any(self.V(x) <= 2 * np.abs(x)):
            raise NonConfining("potential does not dominate 2|x| at infinity")

    def real_roots(self, poly):
        r = P.polyroots(poly) if len(np.trim_zeros(poly, "b")) > 1 else np.array([])
        r = np.asarray(r)
        return np.sort(r[np.abs(r.imag) < 1e-10].real)

    def to_dict(self):
        return {"name": self.name, "coefficients": [float(c) for c in self.coef]}

    def __repr__(self):
        return f"Potential({self.name}, coef={self.coef.tolist()})"


@dataclass(frozen=True)
class EquilibriumData:
    """One-cut equilibrium measure of a potential.

    Attributes
    ----------
    left, right : float
        Support endpoints.
    h_coef : ndarray
        Ascending coefficients of the polynomial ``h``.
    robin : float
        Robin constant ``l`` with ``g_+ + g_- - V = l`` on the support.
    beta : float
        Edge constant: ``pi * density(x) / sqrt(right - x) -> beta^{3/2}``.
    g_right : float
        ``g`` at the right endpoint.
    """

    potential: Potential
    left: float
    right: float
    h_coef: np.ndarray
    robin: float
    beta: float
    g_right: float
    robin_edge: float = field(default=np.nan)

    @property
    def center(self):
        return 0.5 * (self.left + self.right)

    @property
    def radius(self):
        return 0.5 * (self.right - self.left)

    @property
    def e(self):
        return self.right

    @property
    def half_dV_edge(self):
        return 0.5 * float(self.potential.dV(self.right))

    def h(self, x):
        return P.polyval(x, self.h_coef)

    def density(self, x):
        """Equilibrium density, zero outside the support."""
        x = np.asarray(x, dtype=float)
        inside = (x > self.left) & (x < self.right)
        root = np.sqrt(np.clip((self.right - x) * (x - self.left), 0.0, None))
        out = root * self.h(x) / (2 * np.pi**2)
        return np.where(inside, out, 0.0)

    def cdf(self, x):
        """Distribution function of the equilibrium measure."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        c, r = self.center, self.radius
        rule = gauss_legendre(64, 0.0, 1.0)
        out = np.empty_like(x)
        for k, xv in enumerate(x):
            if xv <= self.left:
                out[k] = 0.0
            elif xv >= self.right:
                out[k] = 1.0
            else:
                # theta from pi (left end) down to arccos((x-c)/r)
                t0 = np.arccos(np.clip((xv - c) / r, -1, 1))
                th = t0 + (np.pi - t0) * rule.nodes
                y = c + r * np.cos(th)
                vals = r**2 * np.sin(th) ** 2 * self.h(y) / (2 * np.pi**2)
                out[k] = (np.pi - t0) * np.dot(rule.weights, vals)
        return out


@dataclass(frozen=True)
class OutlierLocation:
    """Global maximiser of ``G(.; a)`` right of ``c(a)``."""

    x0: float
    second_deriv: float
    is_secondary_critical: bool
    x1: float = np.nan
    x2: float = np.nan
    gap: float = np.nan


@dataclass
class PhasePortrait:
    """Phase data of a potential over a spike range."""

    eq: EquilibriumData
    a_c: float
    is_continuous_transition: bool
    secondary_criticals: list

    def c_map(self, a):
        return c_of_a(self.eq, a)

    def x0_map(self, a):
        return x0_of_a(self.eq, a, a_c=self.a_c)

    def to_dict(self, a_grid=()):
        table = []
        for a in a_grid:
            try:
                loc = self.x0_map(a)
                table.append({"a": a, "x0": loc.x0, "G2": loc.second_deriv,
                              "secondary": loc.is_secondary_critical})
            except (DomainError, FlatMaximum) as exc:
                table.append({"a": a, "error": type(exc).__name__})
        eq = self.eq
        return {
            "potential": eq.potential.to_dict(),
            "left_endpoint": eq.left,
            "right_endpoint": eq.right,
            "beta": eq.beta,
            "robin_constant": eq.robin,
            "a_c": self.a_c,
            "half_dV_edge": eq.half_dV_edge,
            "is_continuous_transition": self.is_continuous_transition,
            "x0_table": table,
            "secondary_criticals": [
                {"a": a, "x1": x1, "x2": x2} for a, x1, x2 in self.secondary_criticals
            ],
        }


# ---------------------------------------------------------------- solver


def _cheb_theta(N=_CHEB_NODES):
    return (np.arange(N) + 0.5) * np.pi / N


def _moment_conditions(pot, c, r):
    """Residuals and Jacobian of the one-cut endpoint conditions.

    F1 = (1/pi) int V'(c + r cos) dtheta
    F2 = (r/pi) int V'(c + r cos) cos dtheta - 2
    Gauss-Chebyshev is exact for the polynomial integrands.
    """
    th = _cheb_theta()
    cs = np.cos(th)
    y = c + r * cs
    d1 = pot.dV(y)
    d2 = pot.d2V(y)
    F = np.array([d1.mean(), r * (d1 * cs).mean() - 2.0])
    J = np.array([
        [d2.mean(), (d2 * cs).mean()],
        [r * (d2 * cs).mean(), (d1 * cs).mean() + r * (d2 * cs * cs).mean()],
    ])
    return F, J


def _solve_endpoints(pot, tol=1e-13, maxiter=200):
    roots = pot.real_roots(pot.d1)
    span = float(np.max(np.abs(roots))) if roots.size else 0.0
    lo, hi = -span - 1.0, span + 1.0
    c, r = 0.5 * (lo + hi), 0.5 * (hi - lo)
    for _ in range(maxiter):
        F, J = _moment_conditions(pot, c, r)
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            raise NoConvergence("singular Jacobian in endpoint solve") from None
        lam = 1.0
        norm0 = np.linalg.norm(F)
        while lam > 1e-6:
            cn, rn = c - lam * step[0], r - lam * step[1]
            if rn > 0:
                Fn, _ = _moment_conditions(pot, cn, rn)
                if np.linalg.norm(Fn) < (1 - 1e-4 * lam) * norm0 or norm0 < 1e-13:
                    break
            lam *= 0.5
        else:
            raise NoConvergence("damped Newton stalled in endpoint solve")
        c, r = cn, rn
        if abs(step[0]) * lam < tol * (1 + abs(c)) and abs(step[1]) * lam < tol * r:
            F, _ = _moment_conditions(pot, c, r)
            if np.linalg.norm(F) < 1e-10:
                return c, r
    raise NoConvergence("endpoint solve did not converge")


def _h_coefficients(pot, c, r):
    """Coefficients of ``h(z)`` using Chebyshev-exact means of powers of y."""
    d1 = pot.d1
    deg = d1.size - 1
    th = _cheb_theta()
    y = c + r * np.cos(th)
    mu = np.array([np.mean(y**m) for m in range(max(deg, 1))])
    h = np.zeros(max(deg, 1))
    # (z^k - y^k)/(z - y) = sum_{j<k} z^j y^{k-1-j}
    for k in range(1, deg + 1):
        for j in range(k):
            h[j] += d1[k] * np.pi * mu[k - 1 - j]
    return h


def _g_right_of_support(eq_like, x):
    """``g(x)`` for ``x >= right`` by direct quadrature against the density."""
    c, r, hc = eq_like
    right = c + r

    def integrand(th):
        y = c + r * np.cos(th)
        return np.log(x - y) * r**2 * np.sin(th) ** 2 * P.polyval(y, hc) / (2 * np.pi**2)

    if x - right < 1e-12:
        # log(r (1 - cos)) = log r + log 2 + 2 log sin(theta/2)
        def integrand(th):  # noqa: F811
            y = c + r * np.cos(th)
            lg = np.log(2 * r) + 2 * np.log(np.sin(th / 2)) if th > 0 else 0.0
            return lg * r**2 * np.sin(th) ** 2 * P.polyval(y, hc) / (2 * np.pi**2)

    return _quad(integrand, 0.0, np.pi)


def _quad(f, a, b, points=None):
    # the requested tolerance sits at rounding level; quad's warning about it is noise
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, a, b, points=points, epsabs=1e-15, epsrel=1e-14, limit=200)
    return val


def solve_equilibrium(potential):
    """Solve for the one-cut equilibrium measure of ``potential``.

    Raises
    ------
    MultiCut
        The candidate density becomes negative inside the interval, or the
        one-cut measure violates the variational inequality outside it.
    NoConvergence
        The endpoint iteration failed.
    """
    pot = potential
    c, r = _solve_endpoints(pot)
    hc = _h_coefficients(pot, c, r)
    left, right = c - r, c + r

    # positivity of the density inside the support
    inner = c + r * np.cos(np.linspace(0, np.pi, 2001)[1:-1])
    if np.any(P.polyval(inner, hc) < -1e-10):
        raise MultiCut("equilibrium density negative inside the candidate interval")

    g_right = _g_right_of_support((c, r, hc), right)
    robin_edge = 2 * g_right - float(pot.V(right))

    # Robin constant from the midpoint of the support
    def mid_integrand(th):
        y = c + r * np.cos(th)
        return np.log(np.abs(r * np.cos(th))) * r**2 * np.sin(th) ** 2 * P.polyval(y, hc) / (2 * np.pi**2)

    g_mid = _quad(mid_integrand, 0.0, np.pi, points=[np.pi / 2])
    robin = 2 * g_mid - float(pot.V(c))
    if abs(robin - robin_edge) > 1e-8 * (1 + abs(robin)):
        raise NoConvergence("Robin constant inconsistent between centre and edge")

    beta = (np.sqrt(2 * r) * P.polyval(right, hc) / (2 * np.pi)) ** (2.0 / 3.0)
    if not beta > 0:
        raise MultiCut("density does not vanish like a square root at the right edge")
    eq = EquilibriumData(pot, left, right, hc, robin, float(beta), g_right, robin_edge)
    _check_outside(eq)
    return eq


def _check_outside(eq):
    """Variational inequality ``2g - V - l < 0`` off the support."""
    pot = eq.potential
    R = max(pot.growth_bound(), abs(eq.left), abs(eq.right)) * 2 + 5
    xr = eq.right + np.linspace(1e-3, R, 400)
    vals = 2 * g_func(eq, xr) - pot.V(xr) - eq.robin
    xl = eq.left - np.linspace(1e-3, R, 400)
    vals_l = 2 * _g_left(eq, xl) - pot.V(xl) - eq.robin
    if np.any(vals > 1e-9) or np.any(vals_l > 1e-9):
        raise MultiCut("one-cut measure violates the outer variational inequality")


def _omega(eq, z):
    """``g'(z)`` for real ``z >= right``."""
    z = np.asarray(z, dtype=float)
    root = np.sqrt(np.clip((z - eq.right) * (z - eq.left), 0.0, None))
    return 0.5 * eq.potential.dV(z) - eq.h(z) * root / (2 * np.pi)


def _omega_left(eq, z):
    """``g'(z)`` for real ``z <= left`` (real part of the log potential)."""
    z = np.asarray(z, dtype=float)
    root = np.sqrt(np.clip((z - eq.right) * (z - eq.left), 0.0, None))
    return 0.5 * eq.potential.dV(z) + eq.h(z) * root / (2 * np.pi)


_GRULE = gauss_legendre(48, 0.0, 1.0)


def g_func(eq, x):
    """Log potential ``g(x) = int log(x - s) density(s) ds`` for ``x >= right``.

    Integrates ``g'`` from the edge with the substitution ``x = right + u^2``,
    which removes the square-root singularity.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < eq.right - 1e-14):
        raise DomainError("g is evaluated only right of the support")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    U = np.sqrt(np.clip(x - eq.right, 0.0, None))
    u = U[:, None] * _GRULE.nodes[None, :]
    vals = 2 * u * _omega(eq, eq.right + u**2)
    out = eq.g_right + U * (vals @ _GRULE.weights)
    # long stretches: split into unit panels in u for accuracy
    far = U > 4
    for k in np.nonzero(far)[0]:
        br = np.linspace(0.0, U[k], int(np.ceil(U[k])) + 1)
        tot = 0.0
        for a, b in zip(br[:-1], br[1:]):
            uu = a + (b - a) * _GRULE.nodes
            tot += (b - a) * np.dot(_GRULE.weights, 2 * uu * _omega(eq, eq.right + uu**2))
        out[k] = eq.g_right + tot
    return out[0] if scalar else out


def _g_left(eq, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    # g_+ + g_- - V = l also holds at the left edge, where Re g is continuous
    g_left_edge = 0.5 * (eq.robin + float(eq.potential.V(eq.left)))
    U = np.sqrt(np.clip(eq.left - x, 0.0, None))
    out = np.empty_like(x)
    for k in range(x.size):
        br = np.linspace(0.0, U[k], max(1, int(np.ceil(U[k]))) + 1)
        tot = 0.0
        for a, b in zip(br[:-1], br[1:]):
            uu = a + (b - a) * _GRULE.nodes
            tot += (b - a) * np.dot(_GRULE.weights, 2 * uu * _omega_left(eq, eq.left - uu**2))
        out[k] = g_left_edge - tot
    return out


def g_prime(eq, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < eq.right - 1e-14):
        raise DomainError("g' is evaluated only right of the support")
    return _omega(eq, x)


def g_second(eq, x):
    """``g''(x)`` for ``x > right``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= eq.right):
        raise DomainError("g'' requires x > right endpoint")
    q = (x - eq.right) * (x - eq.left)
    root = np.sqrt(q)
    dh = P.polyval(x, P.polyder(eq.h_coef)) if eq.h_coef.size > 1 else 0.0 * x
    dq = 2 * x - eq.right - eq.left
    return 0.5 * eq.potential.d2V(x) - (dh * root + eq.h(x) * dq / (2 * root)) / (2 * np.pi)


def big_G(eq, x, a):
    """``G(x; a) = g(x) - V(x) + a x`` for ``x >= right``."""
    return g_func(eq, x) - eq.potential.V(x) + a * np.asarray(x, dtype=float)


def big_H(eq, x, a):
    """``H(x; a) = -g(x) + a x + l`` for ``x >= right``."""
    return -g_func(eq, x) + a * np.asarray(x, dtype=float) + eq.robin


def big_G_prime(eq, x, a):
    return g_prime(eq, x) - eq.potential.dV(x) + a


def big_G_second(eq, x):
    """``G''(x)``; independent of ``a``."""
    return g_second(eq, x) - eq.potential.d2V(x)


def big_H_second(eq, x):
    return -g_second(eq, x)


# ---------------------------------------------------------------- c(a), a_c


def c_of_a(eq, a):
    """Minimiser of ``H(.; a)`` on ``[right, inf)``.

    Equals the right endpoint exactly when ``a >= V'(right)/2``; otherwise the
    root of ``g'(c) = a``.
    """
    a = float(a)
    if not a > 0:
        raise DomainError("c(a) is defined for a > 0")
    e = eq.right
    if a >= eq.half_dV_edge:
        return e
    hi = e + 1.0
    while g_prime(eq, hi) > a:
        hi = e + 2 * (hi - e)
        if hi - e > 1e12:
            raise SearchBoundsExceeded("c(a) search exceeded bounds")
    return optimize.brentq(lambda x: g_prime(eq, x) - a, e, hi, xtol=1e-15, rtol=1e-15)


def _search_right(eq, a, start):
    """A point beyond which ``G'(x; a) < 0`` for all larger ``x``."""
    pot = eq.potential
    infl = pot.real_roots(pot.d2)
    X = max(start, float(infl[-1]) if infl.size else start) + 1.0
    step = 1.0 + (X - eq.right)
    while big_G_prime(eq, X, a) >= 0:
        X += step
        step *= 2
        if X > 1e8:
            raise SearchBoundsExceeded("G(.; a) does not turn down")
    return X


def local_maxima(eq, a, start=None, grid=4000):
    """Interior local maxima of ``G(.; a)`` on ``(start, inf)``.

    Returns arrays of locations and values, sorted by location.  A maximum
    at ``start`` itself (``G' < 0`` there) is included.
    """
    start = c_of_a(eq, a) if start is None else float(start)
    X = _search_right(eq, a, start)
    # square-root clustering near the edge where g' is singular
    u = np.linspace(0.0, np.sqrt(X - start), grid)
    x = start + u**2
    d = big_G_prime(eq, x, a)
    locs = []
    if d[0] < 0:
        locs.append(start)
    idx = np.nonzero((d[:-1] > 0) & (d[1:] <= 0))[0]
    for i in idx:
        locs.append(optimize.brentq(lambda t: big_G_prime(eq, t, a), x[i], x[i + 1],
                                    xtol=1e-15, rtol=1e-15))
    locs = np.array(sorted(locs))
    return locs, (big_G(eq, locs, a) if locs.size else np.array([]))


def _phi(eq, a):
    """``max_{x >= c(a)} G(x; a) - H(c(a); a)``; positive above ``a_c``."""
    c = c_of_a(eq, a)
    locs, vals = local_maxima(eq, a, start=c)
    return float(np.max(vals) - big_H(eq, c, a))


def critical_ac(eq, window=None, tol=1e-12):
    """Critical spike value ``a_c`` and whether the transition is continuous.

    ``Phi(a) = max G - H(c(a))`` is increasing in ``a``.  If it is not
    positive at ``a = V'(right)/2`` then ``a_c = V'(right)/2`` (continuous
    transition); otherwise ``a_c`` is the root of ``Phi`` below that value.
    """
    a_half = eq.half_dV_edge
    if a_half <= 0:
        raise SearchBoundsExceeded("V'(right) must be positive")
    e = eq.right
    locs, vals = local_maxima(eq, a_half, start=e)
    interior = locs[locs > e + 1e-9]
    gap = (np.max(big_G(eq, interior, a_half)) - big_G(eq, e, a_half)) if interior.size else -1.0
    if gap <= 1e-12:
        return a_half, True
    lo, hi = (window if window is not None else (1e-3 * a_half, a_half))
    if _phi(eq, lo) > 0:
        raise SearchBoundsExceeded("critical value below the search window")
    f = lambda a: _phi(eq, a)  # noqa: E731
    ac = optimize.brentq(f, lo, hi, xtol=tol, rtol=1e-15)
    return ac, bool(abs(ac - a_half) < 1e-8)


def x0_of_a(eq, a, a_c=None, tie_tol=TIE_TOL):
    """Outlier location: global maximiser of ``G(.; a)`` right of ``c(a)``.

    Parameters
    ----------
    eq : EquilibriumData
    a : float
        Spike value; must be at least ``a_c`` (computed if not given).
    tie_tol : float
        Relative tolerance declaring two local maxima tied.

    Returns
    -------
    OutlierLocation
    """
    a = float(a)
    if a_c is None:
        a_c = critical_ac(eq)[0]
    if a < a_c - 1e-12:
        raise DomainError(f"x0(a) requires a >= a_c = {a_c}")
    c = c_of_a(eq, a)
    locs, vals = local_maxima(eq, a, start=c)
    keep = locs > c if a > a_c else np.ones(locs.size, bool)
    locs, vals = locs[keep], vals[keep]
    if locs.size == 0:
        raise FlatMaximum("no interior maximum of G")
    order = np.argsort(vals)[::-1]
    best = locs[order[0]]
    g2 = float(big_G_second(eq, best))
    tied = False
    x1 = x2 = gap = np.nan
    if locs.size > 1:
        gap = float(vals[order[0]] - vals[order[1]])
        if gap < tie_tol * (1 + abs(vals[order[0]])):
            tied = True
            x1, x2 = sorted((locs[order[0]], locs[order[1]]))
    if abs(g2) < FLAT_TOL:
        raise FlatMaximum(f"G'' = {g2:.3e} at the maximiser")
    return OutlierLocation(float(best), g2, tied, float(x1), float(x2), gap)


def scan_secondary_criticals(eq, a_range, grid=60, tol=1e-13):
    """Spike values where the outlier location jumps between two maxima.

    Scans ``a`` over ``grid`` points in ``a_range``, tracks the difference
    between the two largest local maxima of ``G`` and refines each sign
    change by bisection.

    Returns
    -------
    list of (a_star, x1, x2)
    """
    lo, hi = map(float, a_range)
    pot = eq.potential
    infl = pot.real_roots(pot.d2)
    convex = pot.convex_beyond_edge
    if convex is None:
        convex = not np.any(infl > eq.right)
    if convex:
        return []

    def gap(a):
        locs, vals = local_maxima(eq, a, start=c_of_a(eq, a))
        locs, vals = locs[locs > eq.right], vals[locs > eq.right]
        if locs.size < 2:
            return None
        i = np.argsort(locs)
        # far maximum minus near maximum
        return float(vals[i[-1]] - vals[i[0]])

    out = []
    grid_a = np.linspace(lo, hi, int(grid))
    prev_a, prev = None, None
    for a in grid_a:
        cur = gap(a)
        if cur is not None and prev is not None and np.sign(cur) != np.sign(prev):
            f = lambda t: gap(t) if gap(t) is not None else np.nan  # noqa: E731
            astar = optimize.brentq(f, prev_a, a, xtol=tol, rtol=1e-15)
            locs, _ = local_maxima(eq, astar, start=c_of_a(eq, astar))
            locs = np.sort(locs[locs > eq.right])
            out.append((float(astar), float(locs[0]), float(locs[-1])))
        prev_a, prev = (a, cur) if cur is not None else (None, None)
    return out


def phase_portrait(eq, a_range=None, grid=60):
    """Collect ``a_c`` and secondary-critical values."""
    ac, cont = critical_ac(eq)
    if a_range is None:
        a_range = (ac * 1.001 + 1e-6, 5 * max(ac, 1.0))
    sec = scan_secondary_criticals(eq, a_range, grid)
    return PhasePortrait(eq, ac, cont, sec)


def validate_spikes(values, min_gap=1e-8):
    v = np.asarray(values, dtype=float)
    if v.size and np.min(np.abs(np.subtract.outer(v, v))[~np.eye(v.size, dtype=bool)], initial=np.inf) < min_gap:
        raise ValidationError("spike values must be distinct")
    return v
