from dataclasses import replace

import numpy as np
import pytest

from linkfair import simulator as sim
from linkfair.scoring import ScoringParams

SMALL = sim.SimConfig(n=60, t_max=40, m=8, runs=2, base_seed=3)


def test_waiting_rate_means():
    assert 1 / sim.waiting_rate(0) == pytest.approx(1000.0)
    assert 1 / sim.waiting_rate(1000) == pytest.approx(47.619, abs=1e-3)


def test_waiting_time_sample_means():
    rng = np.random.default_rng(0)
    w0 = sim.sample_waiting_time(np.zeros(100_000, int), 1001, rng)
    # ceil adds about half a step to the exponential mean
    assert abs(w0.mean() - 1000) / 1000 < 0.02
    w1 = sim.sample_waiting_time(np.full(100_000, 1000), 1001, rng)
    assert abs(w1.mean() - 47.6) / 47.6 < 0.02
    w = sim.sample_waiting_time(np.full(100_000, 450), 1000, rng)  # rate 0.01
    assert abs(w.mean() - 100.0) / 100.0 < 0.02
    assert w.min() >= 1 and w.dtype == np.int64


def test_waiting_time_validates_size():
    with pytest.raises(ValueError):
        sim.sample_waiting_time(10, 10, np.random.default_rng(0))


def test_all_waiting_positive_leaves_graph_unchanged():
    state = sim.init_state(SMALL)
    state.waiting[:] = np.arange(1, SMALL.n + 1)
    g = state.graph.copy()
    sim.step(state, SMALL)
    assert state.graph == g
    np.testing.assert_array_equal(state.waiting, np.arange(0, SMALL.n))
    assert state.metrics.records[-1].new_conn_total == 0


def single_source_step(config, source=0):
    state = sim.init_state(config)
    state.waiting[:] = 5
    state.waiting[source] = 0
    before = state.graph.copy()
    sim.step(state, config)
    return state, before


def test_certain_acceptance_connects_top_six_slots():
    conf = replace(SMALL, m=20, scoring=ScoringParams(beta0=100, noise_var=0.0))
    state, before = single_source_step(conf)
    assert len(before.non_neighbors(0)) >= 20
    # v_6 = 1/ln 7 > 0.5 > v_7 = 1/ln 8
    assert len(state.last_new_edges) == 6
    assert state.graph.degree(0) == before.degree(0) + 6


def test_impossible_acceptance_never_connects():
    conf = replace(SMALL, t_max=60, scoring=ScoringParams(beta0=-100))
    res = sim.simulate_run(conf)
    assert res.final_graph == res.initial_graph
    assert res.metrics.column("new_conn_total").sum() == 0


def test_new_edges_were_recommended_and_degrees_grow():
    conf = replace(SMALL, intervention="dp", scoring=ScoringParams(beta0=3.0))
    state = sim.init_state(conf)
    state.waiting[::3] = 0
    total_new = 0
    for _ in range(30):
        deg = state.graph.degrees.copy()
        sim.step(state, conf)
        state.graph.check_invariants()
        assert np.all(state.graph.degrees >= deg)
        for s, d in state.last_new_edges:
            assert (s, d) in state.last_recommended
        total_new += len(state.last_new_edges)
    assert total_new > 0


def test_exposure_parity_holds_per_query():
    conf = replace(SMALL, intervention="dp")
    res = sim.simulate_run(conf, keep_query_log=True)
    assert res.query_log
    for q in res.query_log:
        if not q.dropped:
            assert abs(q.per_capita_gap) <= 1e-8


def test_t_max_zero_has_only_initial_row():
    res = sim.simulate_run(replace(SMALL, t_max=0))
    assert len(res.metrics) == 1 and res.metrics.records[0].t == 0
    assert res.final_graph == res.initial_graph


def test_runs_are_deterministic():
    a = sim.simulate_run(SMALL, 1)
    b = sim.simulate_run(SMALL, 1)
    assert a.metrics.records == b.metrics.records
    assert a.final_graph == b.final_graph


def test_arms_share_initial_state():
    out = sim.run_arms(replace(SMALL, t_max=5, runs=1))
    g0 = [out[a][0].initial_graph for a in ("none", "dp", "dyn")]
    assert g0[0] == g0[1] == g0[2]
    p0 = [out[a][0].population for a in ("none", "dp", "dyn")]
    assert p0[0] == p0[1] == p0[2]
    assert out["none"][0].metrics.records[0] == out["dyn"][0].metrics.records[0]


def test_runs_differ_from_each_other():
    a = sim.init_state(SMALL, 0)
    b = sim.init_state(SMALL, 1)
    assert a.graph != b.graph
    np.testing.assert_array_equal(a.population.group_means, b.population.group_means)


def test_config_validation():
    with pytest.raises(ValueError):
        sim.SimConfig(intervention="bogus")
    with pytest.raises(ValueError):
        sim.SimConfig(n=10, m=10)
    assert sim.SimConfig(intervention="exposure_parity").intervention == "dp"
