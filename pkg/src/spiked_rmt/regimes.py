"""Spike schedules for each asymptotic regime and the law predicted for each eigenvalue.

A :class:`RegimePlan` turns user parameters ``(a, alphas, m)`` and a matrix
size ``n`` into concrete spike values, and for the ``k``-th largest
eigenvalue reports how to centre and scale it and which distribution
function it should follow in the limit.
"""

from dataclasses import dataclass, field

import numpy as np

from . import laws
from .errors import CaseOutOfRange, DomainError, ValidationError
from .phase import (
    big_G_second,
    big_H_second,
    c_of_a,
    critical_ac,
    scan_secondary_criticals,
    validate_spikes,
    x0_of_a,
)
from .transitions import (
    OneCutFrame,
    jump_scaling,
    jump_scaling_critical,
    mixture_prediction,
    p_m,
    p_tilde_m,
)

__all__ = ["REGIMES", "RegimePlan", "Statistic", "plan_regime", "tabulate"]

REGIMES = (
    "subcritical",
    "supercritical-separated",
    "supercritical-clustered",
    "secondary-critical",
    "critical-continuous",
    "critical-jump",
)

SNAP_WINDOW = 1e-3

LAW_GRID = np.round(np.arange(-8.0, 8.0 + 1e-9, 0.05), 10)


@dataclass(frozen=True)
class Statistic:
    """How to rescale one eigenvalue and the law it is compared with."""

    k: int
    mode: str
    center: float
    beta: float = None
    curvature: float = None
    law: object = field(default=None, repr=False)
    description: str = ""


@dataclass(frozen=True)
class RegimePlan:
    regime: str
    n: int
    spikes: tuple
    statistics: dict = field(repr=False)
    meta: dict = field(default_factory=dict)

    def statistic(self, k):
        if k not in self.statistics:
            raise CaseOutOfRange(f"no prediction for eigenvalue {k} in regime {self.regime}")
        return self.statistics[k]


def tabulate(func, grid=LAW_GRID):
    """Evaluate a scalar law on ``grid`` and return a fast interpolating CDF."""
    vals = np.array([float(np.real(func(t))) for t in grid])
    return laws.LawCurve("tabulated", {}, np.asarray(grid, dtype=float), vals).cdf


def _edge(eq, k, law, description):
    return Statistic(k, "edge", eq.right, beta=eq.beta, law=law, description=description)


def _outlier(eq, k, x, law, description):
    return Statistic(k, "outlier", x, curvature=float(big_G_second(eq, x)), law=law, description=description)


def _tw(j):
    return lambda grid=LAW_GRID: tabulate(lambda t: laws.tw_jth(t, j), grid)


def _snap_secondary(eq, a, a_c, window=SNAP_WINDOW):
    """The secondary critical value within ``window`` of ``a``.

    A tie between two maxima only holds to rounding error, so a user value
    given to a few digits is replaced by the refined root nearby.
    """
    lo = max(a - window, a_c)
    roots = scan_secondary_criticals(eq, (lo, a + window), grid=8)
    if not roots:
        raise ValidationError(f"a = {a} is not within {window} of a secondary critical value")
    return float(min(roots, key=lambda r: abs(r[0] - a))[0])


def plan_regime(eq, regime, n, a=None, alphas=(), m=1, spikes=None, max_k=None):
    """Spike values and per-eigenvalue predictions for ``regime``.

    Laws are returned lazily: ``statistic(k).law()`` tabulates the CDF on a
    grid and returns an interpolant.

    Parameters
    ----------
    eq : EquilibriumData
    regime : str
        One of :data:`REGIMES`.
    n : int
        Matrix size.
    a : float
        Base spike value (clustered, secondary-critical regimes).
    alphas : sequence of float
        Offsets in the natural scale of the regime.
    m : int
        Number of eigenvalues that jump (jump regimes only).
    spikes : sequence of float
        Explicit spike values (subcritical and separated regimes).
    """
    if regime not in REGIMES:
        raise ValidationError(f"regime must be one of {REGIMES}")
    n = int(n)
    alphas = tuple(float(x) for x in alphas)
    a_c, continuous = critical_ac(eq)
    stats = {}
    meta = {"a_c": a_c, "continuous_transition": continuous}
    if regime in ("subcritical", "supercritical-separated"):
        if not spikes:
            raise ValidationError(f"regime {regime} needs explicit spikes")
        vals = tuple(sorted((float(s) for s in spikes), reverse=True))
        validate_spikes(vals)
        sup = [s for s in vals if s > a_c]
        if regime == "subcritical" and sup:
            raise ValidationError("subcritical spikes must be below a_c")
        if regime == "supercritical-separated" and not sup:
            raise ValidationError("need at least one spike above a_c")
        for k, s in enumerate(sup, start=1):
            x0 = x0_of_a(eq, s, a_c).x0
            stats[k] = _outlier(eq, k, x0, lambda grid=LAW_GRID: laws.normal_cdf, f"normal law at x0({s})")
        for j in range(1, 4):
            stats[len(sup) + j] = _edge(eq, len(sup) + j, _tw(j), f"Tracy-Widom law of rank {j}")
        return RegimePlan(regime, n, vals, stats, meta)

    if regime == "supercritical-clustered":
        if a is None or not alphas:
            raise ValidationError("clustered regime needs a and alphas")
        loc = x0_of_a(eq, a, a_c)
        scale = np.sqrt(-loc.second_deriv)
        vals = tuple(a + scale * al / np.sqrt(n) for al in alphas)
        mm = len(alphas)
        for k in range(1, mm + 1):
            law = (lambda k=k: lambda grid=LAW_GRID: tabulate(lambda t: laws.gk_jth(t, k, mm, alphas), grid))()
            stats[k] = _outlier(eq, k, loc.x0, law, f"spiked GUE law, rank {k} of {mm}")
        stats[mm + 1] = _edge(eq, mm + 1, _tw(1), "Tracy-Widom law")
        meta.update(x0=loc.x0, G2=loc.second_deriv)
        return RegimePlan(regime, n, vals, stats, meta)

    if regime == "critical-continuous":
        if not continuous:
            raise ValidationError("the transition of this potential is not continuous")
        if not alphas:
            raise ValidationError("critical regime needs alphas")
        vals = tuple(a_c + eq.beta * al / n ** (1.0 / 3.0) for al in alphas)
        neg = tuple(-al for al in alphas)
        for k in range(1, 4):
            law = (lambda k=k: lambda grid=LAW_GRID: laws.LawCurve(
                "fk", {}, grid, laws.law_curve("fk", grid, neg, j=k).values).cdf)()
            stats[k] = _edge(eq, k, law, f"deformed Airy law, rank {k}, parameters {neg}")
        meta.update(law_parameters=neg, note="limit law uses the negated offsets")
        return RegimePlan(regime, n, vals, stats, meta)

    mm = len(alphas)
    if mm < 1 or not all(x > y for x, y in zip(alphas, alphas[1:])):
        raise ValidationError("jump regimes need strictly descending alphas")
    if not 1 <= int(m) <= mm:
        raise ValidationError("m must be in 1..len(alphas)")
    m = int(m)
    frame = OneCutFrame.from_equilibrium(eq)
    if regime == "secondary-critical":
        if a is None:
            raise ValidationError("secondary-critical regime needs a")
        a = _snap_secondary(eq, float(a), a_c)
        loc = x0_of_a(eq, a, a_c)
        g1, g2 = float(big_G_second(eq, loc.x1)), float(big_G_second(eq, loc.x2))
        scaling = jump_scaling(loc.x1, loc.x2, g1, g2, mm, m, a)
        result = p_m(frame, loc.x1, loc.x2, g1, g2, mm, m, alphas)
        points = {"x2": loc.x2, "x1": loc.x1}
        kind = "secondary"
        cases = [(k, "x2") for k in range(1, m + 1)] + [(k, "x1") for k in range(m, mm + 1)]
        meta.update(a_star=a, x1=loc.x1, x2=loc.x2)
    else:
        if continuous:
            raise ValidationError("the transition of this potential is continuous")
        c = c_of_a(eq, a_c)
        x0 = x0_of_a(eq, a_c, a_c).x0
        h2, g2 = float(big_H_second(eq, c)), float(big_G_second(eq, x0))
        scaling = jump_scaling_critical(c, x0, h2, g2, mm, m, a_c)
        result = p_tilde_m(frame, c, x0, h2, g2, mm, m, alphas)
        points = {"x0": x0}
        kind = "critical"
        cases = [(k, "x0") for k in range(1, m + 1)] + [(m, "edge")]
        meta.update(c=c, x0=x0)
    vals = tuple(float(v) for v in scaling.spikes(n, alphas))
    for k, point in cases:
        pred = mixture_prediction(result, k, point, kind)
        law = (lambda pred=pred: lambda grid=LAW_GRID: tabulate(pred, grid))()
        if point == "edge":
            stat = _edge(eq, k, law, f"mixture at the edge, p={result.p:.6g}")
        else:
            stat = _outlier(eq, k, points[point], law, f"mixture at {point}, p={result.p:.6g}")
        stats[(k, point)] = stat
        stats.setdefault(k, stat)
    meta.update(p=result.p, q=scaling.q, K=scaling.K, transition=result.to_json())
    return RegimePlan(regime, n, vals, stats, meta)
