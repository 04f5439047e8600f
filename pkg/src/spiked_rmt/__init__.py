"""Spiked Hermitian random matrix models.

Phase diagram of the equilibrium measure, finite-n determinantal
expectations, limiting top-eigenvalue laws, transition probabilities and
Monte Carlo samplers.
"""

from . import errors
from .finite import (
    brute_force_expectation,
    build_basis,
    expectation_rank_m_direct,
    expectation_rank_m_identity,
    gap_prob,
)
from .laws import f1, fk, fk_jth, fredholm_tw, gk, gk_jth, law_curve, normal_cdf, tw_jth
from .phase import (
    Potential,
    big_G,
    big_H,
    c_of_a,
    critical_ac,
    g_func,
    phase_portrait,
    scan_secondary_criticals,
    solve_equilibrium,
    x0_of_a,
)
from .regimes import REGIMES, plan_regime
from .sampler import (
    ks_distance,
    load_batch,
    rescale,
    sample_gaussian_spiked,
    sample_general_mcmc,
    save_batch,
)
from .transitions import OneCutFrame, mixture_prediction, p_m, p_tilde_m

__version__ = "0.1.0"
