"""Mixed preferential attachment (MPA) urn model.

Each step adds one node (minority with probability ``r``) that connects to
exactly one existing node. Tentative neighbors are proposed and accepted
with the mixing-matrix probability ``pi[src, dst]`` until one connection
forms. Three proposal mechanisms are provided:

``baseline``
    neighbor drawn proportionally to degree over the whole graph;
``dp``
    group drawn first (minority with probability ``r``), then a member of
    that group proportionally to degree;
``dynamic``
    degree-proportional proposal followed by a retention filter ``q[src, dst]``
    that depends on the current minority degree share.

Degree-proportional sampling uses the endpoint urn: every edge endpoint is
stored once, so a uniform endpoint is a degree-proportional node.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.optimize import bisect

VARIANTS = {"baseline": 0, "dp": 1, "dynamic": 2}
Q00_FORMS = {"printed": 0, "consistent": 1}
ALPHA_GUARD = 1e-9
MAX_TRIES = 1_000_000

# counter slots of MpaState.counters
_NODES, _DEG, _LEN0, _LEN1, _T, _EMPTY, _GUARD, _STATUS = range(8)


class MpaError(RuntimeError):
    pass


@dataclass(frozen=True)
class MpaConfig:
    r: float = 0.35
    p0: float = 0.7
    p1: float = 0.7
    d0: int = 20
    variant: str = "baseline"
    t_max: int = 200_000
    seed: int = 0
    stride: int = 1000
    q00_form: str = "printed"

    def __post_init__(self):
        if not 0.0 < self.r <= 0.5:
            raise ValueError(f"r={self.r} must lie in (0, 0.5]")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        for name in ("p0", "p1"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name}={p} is not a probability")
            if self.variant == "dynamic" and not 0.0 < p < 1.0:
                raise ValueError(f"dynamic variant needs {name} strictly inside (0, 1)")
        if self.d0 < 2 or self.d0 % 2:
            raise ValueError(f"d0={self.d0} must be even and at least 2")
        if self.t_max < 0 or self.stride < 1:
            raise ValueError("t_max must be >= 0 and stride >= 1")
        if self.q00_form not in Q00_FORMS:
            raise ValueError(f"unknown q00_form {self.q00_form!r}")


@dataclass
class MpaState:
    """Urn state with preallocated, growable storage.

    ``endpoints`` lists every edge endpoint (a node appears once per unit of
    degree); ``group_endpoints[g]`` is the same list restricted to group g.
    """

    groups: np.ndarray
    degrees: np.ndarray
    endpoints: np.ndarray
    group_endpoints: np.ndarray      # shape (2, capacity)
    counters: np.ndarray = field(default_factory=lambda: np.zeros(8, dtype=np.int64))

    @property
    def n_nodes(self) -> int:
        return int(self.counters[_NODES])

    @property
    def t(self) -> int:
        return int(self.counters[_T])

    @property
    def d_t(self) -> int:
        return int(self.counters[_DEG])

    @property
    def d_t_g1(self) -> int:
        return int(self.counters[_LEN1])

    @property
    def alpha_t(self) -> float:
        return self.d_t_g1 / self.d_t

    @property
    def empty_group_draws(self) -> int:
        return int(self.counters[_EMPTY])

    @property
    def guard_hits(self) -> int:
        return int(self.counters[_GUARD])

    def node_groups(self) -> np.ndarray:
        return self.groups[: self.n_nodes]

    def node_degrees(self) -> np.ndarray:
        return self.degrees[: self.n_nodes]

    def reserve(self, steps: int):
        """Grow storage so that ``steps`` more steps fit."""
        need_nodes = self.n_nodes + steps
        need_ends = self.d_t + 2 * steps
        if need_nodes > len(self.groups):
            cap = max(need_nodes, 2 * len(self.groups))
            self.groups = np.resize(self.groups, cap)
            self.degrees = np.resize(self.degrees, cap)
        if need_ends > len(self.endpoints):
            cap = max(need_ends, 2 * len(self.endpoints))
            self.endpoints = np.resize(self.endpoints, cap)
            ge = np.zeros((2, cap), dtype=np.int64)
            ge[:, : self.group_endpoints.shape[1]] = self.group_endpoints
            self.group_endpoints = ge

    def check_invariants(self, d0: int | None = None):
        n, d = self.n_nodes, self.d_t
        deg = self.node_degrees()
        g = self.node_groups()
        assert deg.sum() == d
        assert deg[g == 1].sum() == self.d_t_g1
        assert self.counters[_LEN0] + self.counters[_LEN1] == d
        counts = np.bincount(self.endpoints[:d], minlength=n)
        assert np.array_equal(counts, deg), "endpoint urn out of sync with degrees"
        if d0 is not None:
            assert d == d0 + 2 * self.t


def _cycle_edges(k: int):
    if k == 1:
        return 2, [(0, 1)]
    if k == 2:
        return 3, [(0, 1), (1, 2)]
    return k, [(i, (i + 1) % k) for i in range(k)]


def _round_robin_groups(n: int, r: float) -> np.ndarray:
    n1 = int(round(r * n))
    if n >= 2:
        n1 = min(max(n1, 1), n - 1)
    # spread minority labels evenly: vertex i is minority when the running
    # quota floor((i + 1) * n1 / n) increases
    i = np.arange(n)
    return (((i + 1) * n1) // n - (i * n1) // n).astype(np.int8)


def state_from_edges(n: int, edges, groups, capacity_steps: int = 0) -> MpaState:
    """Build an urn state from an explicit initial graph."""
    groups = np.asarray(groups, dtype=np.int8)
    edges = list(edges)
    d = 2 * len(edges)
    cap_n, cap_e = n + capacity_steps, d + 2 * capacity_steps
    st = MpaState(
        groups=np.zeros(cap_n, dtype=np.int8),
        degrees=np.zeros(cap_n, dtype=np.int64),
        endpoints=np.zeros(cap_e, dtype=np.int64),
        group_endpoints=np.zeros((2, cap_e), dtype=np.int64),
    )
    st.groups[:n] = groups
    k = 0
    lens = [0, 0]
    for a, b in edges:
        for x in (a, b):
            st.degrees[x] += 1
            st.endpoints[k] = x
            k += 1
            gx = int(groups[x])
            st.group_endpoints[gx, lens[gx]] = x
            lens[gx] += 1
    st.counters[_NODES] = n
    st.counters[_DEG] = d
    st.counters[_LEN0], st.counters[_LEN1] = lens
    return st


def mpa_init(config: MpaConfig, rng: np.random.Generator | None = None) -> MpaState:
    """Initial graph with total degree ``d0``.

    A cycle on ``d0 / 2`` vertices (a single edge for ``d0 = 2`` and a
    3-vertex path for ``d0 = 4``), minority labels spread round-robin at rate
    ``r``. The construction is deterministic; ``rng`` is accepted for
    interface symmetry.
    """
    n, edges = _cycle_edges(config.d0 // 2)
    return state_from_edges(n, edges, _round_robin_groups(n, config.r),
                            capacity_steps=config.t_max)


# ---------------------------------------------------------------- analytics

@njit(cache=True)
def _q_raw(r, p0, p1, a, form):
    if form == 0:
        q00 = (1.0 - r) * (a * (p0 - 2.0) + 2.0) / (p0 * (a - r))
    else:
        q00 = (1.0 - r) * a * (1.0 - p0) / (a * (1.0 - p0 - r) + p0 * r)
    q11 = (1.0 - a) * (1.0 - p1) * r / (a * (p1 - r) - p1 * r + r)
    return q00, q11


@njit(cache=True)
def _clamp01(x):
    if x != x:  # nan
        return 1.0
    return min(max(x, 0.0), 1.0)


def dynamic_q_raw(r: float, p0: float, p1: float, alpha_t: float, q00_form: str = "printed"):
    """Unclamped retention probabilities ``(q00, q11)``."""
    return _q_raw(r, p0, p1, alpha_t, Q00_FORMS[q00_form])


def dynamic_q(r: float, p0: float, p1: float, alpha_t: float, q00_form: str = "printed"):
    """Retention probabilities ``(q00, q01, q10, q11)`` of the dynamic filter.

    ``q_ij`` is the probability of keeping a proposed destination of group j
    for a source of group i. ``q00`` and ``q11`` are clamped to [0, 1] first
    and the complements taken afterwards.

    ``q00_form="printed"`` uses the published formula, which is singular at
    ``alpha_t == r`` and saturates at 0 or 1 elsewhere; ``"consistent"`` uses
    the solution of the probability-consistent recurrence, which keeps the
    majority-to-majority connection probability exactly at ``1 - r``.
    """
    if abs(alpha_t - r) <= ALPHA_GUARD and q00_form == "printed":
        raise ValueError(f"alpha_t={alpha_t} is at the singular point r={r}")
    q00, q11 = dynamic_q_raw(r, p0, p1, alpha_t, q00_form)
    q00, q11 = _clamp01(q00), _clamp01(q11)
    return q00, 1.0 - q00, 1.0 - q11, q11


def dp_connection_probs(r: float, p0: float, p1: float):
    """``(P00, P11)``: chance a source connects within its group under DP sampling."""
    den0 = r + p0 - 2 * r * p0
    den1 = 1 - r - p1 + 2 * r * p1
    if den0 == 0 or den1 == 0:
        raise ZeroDivisionError(f"singular mixing for r={r}, p0={p0}, p1={p1}")
    return (1 - r) * p0 / den0, r * p1 / den1


def theorem1_alpha(r: float, p0: float, p1: float) -> float:
    """Limit of the minority degree share under the demographic-parity proposal."""
    P00, P11 = dp_connection_probs(r, p0, p1)
    a = 0.5 * (r * P11 - (1 - r) * P00 + 1)
    return min(max(a, 0.0), 1.0)


def baseline_connection_probs(alpha: float, p0: float, p1: float):
    """``(P00, P11)`` under degree-proportional proposals at minority share ``alpha``."""
    P00 = (1 - alpha) * p0 / (p0 + alpha - 2 * p0 * alpha)
    P11 = alpha * p1 / (1 - p1 - alpha + 2 * p1 * alpha)
    return P00, P11


def baseline_drift(alpha: float, r: float, p0: float, p1: float) -> float:
    """Expected minority degrees added per step minus ``2 * alpha``."""
    P00, P11 = baseline_connection_probs(alpha, p0, p1)
    return r * (1 + P11) + (1 - r) * (1 - P00) - 2 * alpha


def baseline_alpha(r: float, p0: float, p1: float, eps: float = 1e-9) -> float:
    """Fixed point of the baseline minority degree share, by bisection.

    Solves ``2 alpha = r (1 + P11(alpha)) + (1 - r)(1 - P00(alpha))`` on
    ``[eps, 1 - eps]`` to within 1e-15.
    """
    if not (0 < r < 1 and 0 <= p0 <= 1 and 0 <= p1 <= 1):
        raise ValueError("baseline_alpha needs 0 < r < 1 and p0, p1 in [0, 1]")
    lo, hi = eps, 1 - eps
    f_lo, f_hi = baseline_drift(lo, r, p0, p1), baseline_drift(hi, r, p0, p1)
    if np.sign(f_lo) == np.sign(f_hi):
        raise ValueError(f"no sign change of the drift for r={r}, p0={p0}, p1={p1}")
    return bisect(baseline_drift, lo, hi, args=(r, p0, p1), xtol=1e-15,
                  maxiter=200)


def power_law_exponents(r: float, p0: float, p1: float, alpha: float):
    """Degree-distribution tail exponents ``(beta_G0, beta_G1) = 1 + 1/c_i``."""
    den0 = p0 + alpha - 2 * p0 * alpha
    den1 = 1 - p1 - alpha + 2 * p1 * alpha
    if den0 == 0 or den1 == 0:
        raise ZeroDivisionError(f"singular exponent denominators at alpha={alpha}")
    c0 = 0.5 * ((1 - r) * p0 / den0 + r * (1 - p1) / den1)
    c1 = 0.5 * ((1 - r) * (1 - p0) / den0 + r * p1 / den1)
    return 1 + 1 / c0, 1 + 1 / c1


# ------------------------------------------------------------------ engine

@njit(cache=True)
def _run_kernel(variant, r, p0, p1, q00_form, groups, degrees, endpoints, gends,
                cnt, n_steps, seed, stride, traj, max_tries):
    np.random.seed(seed)
    for _ in range(n_steps):
        d = cnt[1]
        src = 1 if np.random.random() < r else 0
        p_src = p1 if src == 1 else p0
        q_same = 1.0
        q_cross = 1.0
        if variant == 2:
            a = cnt[3] / d
            if abs(a - r) <= 1e-9 and q00_form == 0:
                cnt[6] += 1
            else:
                q00, q11 = _q_raw(r, p0, p1, a, q00_form)
                if src == 0:
                    q_same = _clamp01(q00)
                else:
                    q_same = _clamp01(q11)
                q_cross = 1.0 - q_same
        dest = -1
        tries = 0
        while dest < 0:
            tries += 1
            if tries > max_tries:
                cnt[7] = 1
                return
            if variant == 1:
                g = 1 if np.random.random() < r else 0
                length = cnt[2 + g]
                if length == 0:
                    cnt[5] += 1
                    continue
                v = gends[g, int(np.random.random() * length)]
            else:
                v = endpoints[int(np.random.random() * d)]
            gv = groups[v]
            if variant == 2:
                keep = q_same if gv == src else q_cross
                if np.random.random() >= keep:
                    continue
            accept = p_src if gv == src else 1.0 - p_src
            if np.random.random() < accept:
                dest = v
        new = cnt[0]
        groups[new] = src
        degrees[new] = 1
        degrees[dest] += 1
        endpoints[d] = new
        endpoints[d + 1] = dest
        gends[src, cnt[2 + src]] = new
        cnt[2 + src] += 1
        gd = groups[dest]
        gends[gd, cnt[2 + gd]] = dest
        cnt[2 + gd] += 1
        cnt[0] += 1
        cnt[1] = d + 2
        cnt[4] += 1
        if cnt[4] % stride == 0:
            traj[cnt[4] // stride] = cnt[3] / cnt[1]


def _advance(state: MpaState, config: MpaConfig, n_steps: int, seed: int,
             stride: int, traj: np.ndarray, variant: str | None = None):
    state.reserve(n_steps)
    _run_kernel(VARIANTS[variant or config.variant], config.r, config.p0, config.p1,
                Q00_FORMS[config.q00_form], state.groups, state.degrees, state.endpoints,
                state.group_endpoints, state.counters, n_steps, seed, stride, traj,
                MAX_TRIES)
    if state.counters[_STATUS]:
        raise MpaError(f"rejection loop exceeded {MAX_TRIES} proposals at t={state.t}")


def _step(state, config, rng, variant):
    seed = int(rng.integers(0, 2**32))
    _advance(state, config, 1, seed, 1, np.zeros(state.t + 2), variant)
    return state


def mpa_step_baseline(state: MpaState, config: MpaConfig, rng: np.random.Generator) -> MpaState:
    """One baseline step, in place."""
    return _step(state, config, rng, "baseline")


def mpa_step_dp(state: MpaState, config: MpaConfig, rng: np.random.Generator) -> MpaState:
    """One step with the group-first (demographic parity) proposal, in place."""
    return _step(state, config, rng, "dp")


def mpa_step_dynamic(state: MpaState, config: MpaConfig, rng: np.random.Generator) -> MpaState:
    """One step with the retention filter, in place."""
    return _step(state, config, rng, "dynamic")


@dataclass
class MpaResult:
    times: np.ndarray
    alpha: np.ndarray
    state: MpaState

    def final_degrees(self, group: int) -> np.ndarray:
        g = self.state.node_groups()
        return self.state.node_degrees()[g == group]


def mpa_run(config: MpaConfig, state: MpaState | None = None) -> MpaResult:
    """Run ``config.t_max`` steps and record alpha every ``config.stride`` steps.

    The trajectory always includes t = 0 and the final step. Runs are
    deterministic in ``config.seed``.
    """
    if state is None:
        state = mpa_init(config)
    t0 = state.t
    if t0:
        raise ValueError("mpa_run expects a fresh state at t = 0")
    T, stride = config.t_max, config.stride
    traj = np.full(T // stride + 1, np.nan)
    traj[0] = state.alpha_t
    seed = int(np.random.SeedSequence([config.seed, VARIANTS[config.variant]])
               .generate_state(1)[0])
    if T:
        _advance(state, config, T, seed, stride, traj)
    times = np.arange(0, T + 1, stride)
    if T % stride:
        times = np.append(times, T)
        traj = np.append(traj, state.alpha_t)
    return MpaResult(times=times, alpha=traj, state=state)


def terminal_alphas(config: MpaConfig, seeds) -> np.ndarray:
    """Final alpha for each seed, recording only the endpoint of each run."""
    out = []
    for s in seeds:
        cfg = MpaConfig(**{**config.__dict__, "seed": int(s), "stride": max(config.t_max, 1)})
        out.append(mpa_run(cfg).alpha[-1])
    return np.array(out)


# -------------------------------------------------------------------- grid

def limits_grid(r: float = 0.35, resolution: int = 50):
    """Baseline and DP limits on an interior ``resolution x resolution`` grid.

    Grid points are ``k / (resolution + 1)`` for ``k = 1..resolution``.
    Points where a limit cannot be computed are NaN.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    ps = np.arange(1, resolution + 1) / (resolution + 1)
    rows = []
    for p0 in ps:
        for p1 in ps:
            try:
                ab = baseline_alpha(r, p0, p1)
            except (ValueError, ZeroDivisionError):
                ab = math.nan
            try:
                ad = theorem1_alpha(r, p0, p1)
            except ZeroDivisionError:
                ad = math.nan
            rows.append((p0, p1, ab, ad, abs(ad - r) - abs(ab - r)))
    return np.array(rows)


GRID_COLUMNS = ("p0", "p1", "alpha_baseline", "alpha_dp",
                "alpha_dp_minus_baseline_distance_to_r")


def write_grid_csv(grid: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(GRID_COLUMNS) + "\n")
        for row in grid:
            fh.write(",".join("" if math.isnan(x) else repr(float(x)) for x in row) + "\n")
