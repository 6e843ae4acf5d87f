"""Discrete-time connection recommendation feedback loop.

Every step: members whose waiting time reached zero become sources; each
source scores all members it is not connected to, a ranking policy is solved
(optionally under a parity constraint), a ranking is sampled, and each shown
member connects when the freshly re-drawn connection probability, weighted by
the slot's position bias, clears a threshold. Sources then draw new waiting
times from their updated degree.

All sources of a step read the graph as it was at the start of the step;
the step's new edges are inserted together at the end.

Randomness is split into independent streams keyed by
``(run seed, step, source, purpose)`` so results do not depend on the order
in which sources are processed. Noise is drawn for every member and indexed
by member id, which gives the intervention arms common random numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import ranking as rk
from .graph import SbmParams, SocialGraph, sbm_init
from .metrics import MetricsSeries, snapshot_record
from .population import Population, draw_group_means, init_population
from .scoring import (FeatureNormalizers, ScoringParams, connection_probability,
                      fit_normalizers, scaled_features, score_candidates)

INTERVENTIONS = {"none": rk.NONE, "dp": rk.EXPOSURE, "dyn": rk.UTILITY}
_ALIASES = {"exposure_parity": "dp", "utility_parity": "dyn"}


def canonical_intervention(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in INTERVENTIONS:
        raise ValueError(f"unknown intervention {name!r}; expected one of none, dp, dyn")
    return name


@dataclass(frozen=True)
class SimConfig:
    n: int = 1000
    t_max: int = 2500
    m: int = 20
    minority_rate: float = 0.35
    covariate_dim: int = 30
    covariate_var: float = 0.5
    sbm: SbmParams = field(default_factory=SbmParams)
    scoring: ScoringParams = field(default_factory=ScoringParams)
    intervention: str = "none"
    runs: int = 10
    base_seed: int = 0
    connection_rule: str = "threshold"   # "threshold" or "bernoulli"
    threshold: float = 0.5
    log_base: float = math.e
    similarity_orientation: str = "magnitude"
    similarity_pairs: int = 100_000
    network_size_divisor: float | None = None   # defaults to n
    common_conn_divisor: float | None = None    # defaults to n
    snapshot_steps: tuple = ()

    def __post_init__(self):
        if self.t_max < 0:
            raise ValueError("t_max must be non-negative")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.n <= self.m:
            raise ValueError("n must exceed the slot count m")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.connection_rule not in ("threshold", "bernoulli"):
            raise ValueError(f"unknown connection_rule {self.connection_rule!r}")
        object.__setattr__(self, "intervention", canonical_intervention(self.intervention))


def run_seed(base_seed: int, run: int) -> int:
    """Seed of one repetition, shared by every intervention arm."""
    return int(np.random.SeedSequence([base_seed, run]).generate_state(1, np.uint64)[0])


def _streams(seed: int, t: int, s: int):
    # purposes: 0 scoring noise, 1 ranking draw, 2 connection noise, 3 waiting time
    children = np.random.SeedSequence([seed, t, s]).spawn(4)
    return [np.random.default_rng(c) for c in children]


def waiting_rate(network_size):
    return 0.001 + 0.02 * np.asarray(network_size, dtype=float) / 1000.0


def sample_waiting_time(network_size, n: int, rng: np.random.Generator):
    """Steps until the next recommendation: ``ceil(Exp(rate))``, at least 1.

    ``rate = 0.001 + 0.02 * network_size / 1000``. Accepts a scalar or an
    array of network sizes.
    """
    if np.any(np.asarray(network_size) > n - 1) or np.any(np.asarray(network_size) < 0):
        raise ValueError("network size must lie in [0, n - 1]")
    rate = waiting_rate(network_size)
    w = np.maximum(np.ceil(rng.exponential(1.0 / rate)), 1).astype(np.int64)
    return int(w) if np.ndim(w) == 0 else w


@dataclass
class QueryRecord:
    t: int
    source: int
    n_candidates: int
    n_majority: int
    exposure_majority: float
    exposure_minority: float
    dropped: bool

    @property
    def per_capita_gap(self) -> float:
        n1 = self.n_candidates - self.n_majority
        if not self.n_majority or not n1:
            return math.nan
        return self.exposure_majority / self.n_majority - self.exposure_minority / n1


@dataclass
class SimState:
    graph: SocialGraph
    population: Population
    normalizers: FeatureNormalizers
    waiting: np.ndarray
    seed: int
    t: int = 0
    metrics: MetricsSeries = field(default_factory=lambda: MetricsSeries([]))
    sampling_fallbacks: int = 0
    last_recommended: set = field(default_factory=set)
    last_new_edges: list = field(default_factory=list)
    query_log: list | None = None


def init_state(config: SimConfig, run: int = 0, keep_query_log: bool = False) -> SimState:
    """Population, SBM graph, normalizers and initial waits of one repetition.

    Depends only on ``(base_seed, run)``, never on the intervention, so
    every arm starts from the same state. Group means are shared by all
    repetitions of a base seed.
    """
    means = draw_group_means(config.covariate_dim, np.random.default_rng([config.base_seed]))
    seed = run_seed(config.base_seed, run)
    rng = np.random.default_rng([seed, 0])
    pop = init_population(config.n, config.minority_rate, config.covariate_dim,
                          config.covariate_var, rng, group_means=means)
    graph = sbm_init(config.n, pop.group, config.sbm, rng)
    norm = fit_normalizers(pop, rng, n_pairs=config.similarity_pairs,
                           orientation=config.similarity_orientation,
                           network_size_divisor=config.network_size_divisor,
                           common_conn_divisor=config.common_conn_divisor)
    waiting = sample_waiting_time(graph.degrees, config.n, rng)
    state = SimState(graph=graph, population=pop, normalizers=norm, waiting=waiting,
                     seed=seed, query_log=[] if keep_query_log else None)
    state.metrics = MetricsSeries([snapshot_record(0, graph, pop)], run_id=run,
                                  intervention=config.intervention)
    return state


def _recommend(state: SimState, config: SimConfig, s: int, v_full: np.ndarray, streams):
    """Score, solve and sample for one source. Returns (shown, formed, policy info)."""
    graph, pop = state.graph, state.population
    r_score, r_rank, r_conn, _ = streams
    cands = graph.non_neighbors(s)
    if cands.size == 0:
        return None
    sd = config.scoring.noise_sd
    eps = r_score.normal(0.0, sd, config.n) if sd > 0 else np.zeros(config.n)
    u = score_candidates(graph, pop, config.scoring, state.normalizers, s, cands,
                         eps=eps[cands])
    v = v_full[: min(config.m, cands.size)]
    cgroups = pop.group[cands]
    constraint = rk.make_constraint(INTERVENTIONS[config.intervention], u, cgroups)
    policy = rk.solve_policy(u, v, constraint)
    exposure = rk.group_exposure(policy, v, cgroups)
    order, fallbacks = rk.sample_ranking(policy, r_rank, return_fallbacks=True)
    shown = cands[order]

    eps2 = r_conn.normal(0.0, sd, config.n) if sd > 0 else np.zeros(config.n)
    feats = scaled_features(graph, pop, state.normalizers, s, shown)
    p = np.atleast_1d(connection_probability(feats, config.scoring, eps=eps2[shown]))
    adjusted = np.clip(p * v, 0.0, 1.0)
    if config.connection_rule == "bernoulli":
        formed = r_conn.random(adjusted.size) < adjusted
    else:
        formed = adjusted >= config.threshold
    info = QueryRecord(t=state.t + 1, source=s, n_candidates=int(cands.size),
                       n_majority=int(np.count_nonzero(cgroups == 0)),
                       exposure_majority=float(exposure[0]),
                       exposure_minority=float(exposure[1]),
                       dropped=policy.constraint_dropped)
    return shown, shown[formed], info, fallbacks


def step(state: SimState, config: SimConfig) -> SimState:
    """Advance the simulation by one step, in place."""
    t = state.t + 1
    graph, pop = state.graph, state.population
    sources = np.flatnonzero(state.waiting == 0)
    state.waiting[state.waiting > 0] -= 1
    v_full = rk.position_bias(config.m, config.log_base)

    pending, recommended = [], set()
    exp_major = exp_total = 0.0
    dropped = 0
    wait_rngs = {}
    for s in sources:
        s = int(s)
        streams = _streams(state.seed, t, s)
        wait_rngs[s] = streams[3]
        out = _recommend(state, config, s, v_full, streams)
        if out is None:
            continue
        shown, formed, info, fallbacks = out
        state.sampling_fallbacks += fallbacks
        recommended.update((s, int(d)) for d in shown)
        pending.extend((s, int(d)) for d in formed)
        exp_major += info.exposure_majority
        exp_total += info.exposure_majority + info.exposure_minority
        dropped += info.dropped
        if state.query_log is not None:
            state.query_log.append(info)

    new_edges = []
    maj_dest = maj_deg = 0
    for s, d in pending:
        if graph.add_edge(s, d):
            new_edges.append((s, d))
            maj_dest += pop.group[d] == 0
            maj_deg += (pop.group[d] == 0) + (pop.group[s] == 0)

    for s, rng in wait_rngs.items():
        state.waiting[s] = sample_waiting_time(graph.degrees[s], config.n, rng)

    state.t = t
    state.last_recommended = recommended
    state.last_new_edges = new_edges
    state.metrics.append(snapshot_record(
        t, graph, pop,
        new_conn_majority_dest_count=int(maj_dest),
        new_degree_majority_count=int(maj_deg),
        new_conn_total=len(new_edges),
        expected_exposure_majority_sum=exp_major,
        expected_exposure_total=exp_total,
        constraints_dropped_count=int(dropped),
    ))
    return state


@dataclass
class RunResult:
    run: int
    intervention: str
    seed: int
    metrics: MetricsSeries
    population: Population
    normalizers: FeatureNormalizers
    initial_graph: SocialGraph
    final_graph: SocialGraph
    snapshots: dict
    sampling_fallbacks: int
    query_log: list | None = None


def simulate_run(config: SimConfig, run: int = 0, keep_query_log: bool = False) -> RunResult:
    state = init_state(config, run, keep_query_log)
    initial = state.graph.copy()
    snapshots = {}
    wanted = set(config.snapshot_steps)
    if 0 in wanted:
        snapshots[0] = initial
    for _ in range(config.t_max):
        step(state, config)
        if state.t in wanted:
            snapshots[state.t] = state.graph.copy()
    return RunResult(run=run, intervention=config.intervention, seed=state.seed,
                     metrics=state.metrics, population=state.population,
                     normalizers=state.normalizers, initial_graph=initial,
                     final_graph=state.graph, snapshots=snapshots,
                     sampling_fallbacks=state.sampling_fallbacks,
                     query_log=state.query_log)


def run(config: SimConfig, keep_query_log: bool = False) -> list:
    """All repetitions of the configured intervention."""
    return [simulate_run(config, k, keep_query_log) for k in range(config.runs)]


def run_arms(config: SimConfig, arms=("none", "dp", "dyn"), keep_query_log: bool = False) -> dict:
    """Every repetition of every arm; arms share seeds and initial states."""
    return {arm: run(replace(config, intervention=arm), keep_query_log) for arm in arms}
