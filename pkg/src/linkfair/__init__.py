"""Simulating connection recommendation with fair-exposure rankings.

Modules
-------
graph, population, scoring
    Social graph, member covariates and the logistic connection model.
ranking
    Exposure-maximizing ranking policies with optional parity constraints.
simulator
    The recommendation feedback loop.
mpa
    Mixed preferential attachment urn model and its closed-form limits.
metrics, report
    Per-step records and figure-data tables.
"""
__version__ = "0.1.0"

from .graph import SbmParams, SocialGraph, sbm_init
from .population import MAJORITY, MINORITY, Population, init_population
from .ranking import position_bias, sample_ranking, solve_policy
from .scoring import ScoringParams
from .simulator import SimConfig, run_arms, simulate_run
from .mpa import MpaConfig, baseline_alpha, mpa_run, theorem1_alpha
