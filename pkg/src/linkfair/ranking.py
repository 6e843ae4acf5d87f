"""Probabilistic ranking policies under a single linear fairness constraint.

A policy is a D x m matrix ``P`` whose entry ``P[d, r]`` is the probability
that candidate ``d`` is shown in slot ``r``. Columns sum to one and rows to
at most one. The expected utility of a policy is ``u @ P @ v`` for utilities
``u`` and position-bias weights ``v``.

Without a fairness constraint the optimum is the greedy ranking (sort by
``u``). With one equality ``c @ P @ v = 0`` the optimum mixes at most two
greedy rankings of the Lagrangian scores ``u + lam * c``; ``lam`` is located
by bisection.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NONE, EXPOSURE, UTILITY = "none", "exposure", "utility"


def position_bias(m: int, base: float = np.e) -> np.ndarray:
    """Slot weights ``v_r = 1 / log_base(r + 1)`` for ``r = 1..m``."""
    if m < 1:
        raise ValueError("need at least one slot")
    r = np.arange(1, m + 1)
    return np.log(base) / np.log(r + 1.0)


@dataclass(frozen=True)
class FairnessConstraint:
    kind: str = NONE
    coef: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in (NONE, EXPOSURE, UTILITY):
            raise ValueError(f"unknown constraint kind {self.kind!r}")
        if self.kind != NONE and self.coef is None:
            raise ValueError(f"{self.kind} constraint needs a coefficient vector")


NO_CONSTRAINT = FairnessConstraint()


def group_weights(groups) -> np.ndarray:
    """``1(d in G0)/|G0| - 1(d in G1)/|G1|`` over the given candidate labels."""
    groups = np.asarray(groups)
    n0 = np.count_nonzero(groups == 0)
    n1 = np.count_nonzero(groups == 1)
    w = np.zeros(len(groups))
    if n0:
        w[groups == 0] = 1.0 / n0
    if n1:
        w[groups == 1] = -1.0 / n1
    return w


def exposure_parity(groups) -> FairnessConstraint:
    return FairnessConstraint(EXPOSURE, group_weights(groups))


def utility_parity(u, groups) -> FairnessConstraint:
    return FairnessConstraint(UTILITY, np.asarray(u, dtype=float) * group_weights(groups))


def make_constraint(kind: str, u, groups) -> FairnessConstraint:
    if kind in (NONE, None):
        return NO_CONSTRAINT
    if kind == EXPOSURE:
        return exposure_parity(groups)
    if kind == UTILITY:
        return utility_parity(u, groups)
    raise ValueError(f"unknown constraint kind {kind!r}")


@dataclass
class RankingPolicy:
    """A solved policy together with its decomposition into rankings.

    ``rankings[k][r]`` is the candidate placed in slot ``r`` by the k-th
    deterministic ranking; ``matrix = sum_k weights[k] * permutation(rankings[k])``.
    """

    matrix: np.ndarray
    rankings: list = field(default_factory=list)
    weights: np.ndarray = field(default_factory=lambda: np.ones(1))
    constraint_dropped: bool = False

    @property
    def shape(self):
        return self.matrix.shape

    @classmethod
    def from_rankings(cls, n_candidates: int, rankings, weights,
                      constraint_dropped: bool = False) -> "RankingPolicy":
        rankings = [np.asarray(r, dtype=np.int64) for r in rankings]
        weights = np.asarray(weights, dtype=float)
        m = len(rankings[0])
        P = np.zeros((n_candidates, m))
        slots = np.arange(m)
        for rank, w in zip(rankings, weights):
            P[rank, slots] += w
        return cls(P, rankings, weights, constraint_dropped)

    def objective(self, u, v) -> float:
        return float(np.asarray(u) @ self.matrix @ np.asarray(v))

    def check(self, tol: float = 1e-9):
        P = self.matrix
        assert np.all(P >= -tol) and np.all(P <= 1 + tol), "entries outside [0, 1]"
        assert np.allclose(P.sum(axis=0), 1.0, atol=tol, rtol=0), "column sums != 1"
        assert np.all(P.sum(axis=1) <= 1.0 + tol), "row sums exceed 1"


def _greedy(w: np.ndarray, m: int) -> np.ndarray:
    # stable sort on -w: ties go to the lower candidate index
    return np.argsort(-w, kind="stable")[:m]


def _lex_greedy(c: np.ndarray, u: np.ndarray, m: int) -> np.ndarray:
    """Greedy ranking by ``c`` with ties broken by ``u``: the lam -> inf limit."""
    idx = np.arange(len(c))
    return np.lexsort((idx, -u, -c))[:m]


def solve_policy(u, v, constraint: FairnessConstraint = NO_CONSTRAINT,
                 tol: float = 1e-10, max_iter: int = 200) -> RankingPolicy:
    """Utility-maximizing policy, optionally under ``c @ P @ v = 0``.

    Parameters
    ----------
    u : array_like, shape (D,)
        Candidate utilities.
    v : array_like, shape (m,)
        Position-bias weights, strictly decreasing, ``m <= D``.
    constraint : FairnessConstraint
        Exposure or utility parity coefficients, or none.
    tol : float
        Bisection stops once the multiplier bracket is narrower than ``tol``
        (relative) or a single ranking meets the constraint to within ``tol``
        (on coefficients scaled to unit max-norm).
    max_iter : int
        Bisection iteration cap.

    Returns
    -------
    RankingPolicy
        When no policy can satisfy the constraint (for instance when one
        group is absent from the candidates) the unconstrained optimum is
        returned with ``constraint_dropped=True``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    D, m = len(u), len(v)
    if not 1 <= m <= D:
        raise ValueError(f"need 1 <= m <= D, got m={m}, D={D}")
    if not np.all(np.isfinite(u)):
        raise ValueError("utilities must be finite")

    greedy_u = _greedy(u, m)
    if constraint.kind == NONE:
        return RankingPolicy.from_rankings(D, [greedy_u], [1.0])

    c = np.asarray(constraint.coef, dtype=float)
    if c.shape != (D,):
        raise ValueError(f"constraint coefficients must have length {D}")
    scale = np.abs(c).max()
    if scale == 0.0:
        return RankingPolicy.from_rankings(D, [greedy_u], [1.0])
    c = c / scale

    def h(rank):
        return float(c[rank] @ v)

    h0 = h(greedy_u)
    if abs(h0) <= tol:
        return RankingPolicy.from_rankings(D, [greedy_u], [1.0])
    # orient so the unconstrained ranking sits on the negative side
    sign = -1.0 if h0 > 0 else 1.0
    c = sign * c
    h0 = -abs(h0)

    rank_inf = _lex_greedy(c, u, m)
    h_inf = h(rank_inf)
    if h_inf < -tol:
        return RankingPolicy.from_rankings(D, [greedy_u], [1.0], constraint_dropped=True)
    if abs(h_inf) <= tol:
        return RankingPolicy.from_rankings(D, [rank_inf], [1.0])

    # bracket the multiplier
    u_span = float(u.max() - u.min()) + 1.0
    lo, rank_lo, h_lo = 0.0, greedy_u, h0
    hi = u_span
    rank_hi = _greedy(u + hi * c, m)
    h_hi = h(rank_hi)
    lam_cap = u_span * 1e9
    while h_hi < 0 and hi < lam_cap:
        lo, rank_lo, h_lo = hi, rank_hi, h_hi
        hi *= 2.0
        rank_hi = _greedy(u + hi * c, m)
        h_hi = h(rank_hi)
    if h_hi < 0:
        hi, rank_hi, h_hi = np.inf, rank_inf, h_inf

    for _ in range(max_iter):
        if np.isfinite(hi) and hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi) if np.isfinite(hi) else 2.0 * max(lo, 1.0)
        rank = _greedy(u + mid * c, m)
        hm = h(rank)
        if abs(hm) <= tol:
            return RankingPolicy.from_rankings(D, [rank], [1.0])
        if hm < 0:
            lo, rank_lo, h_lo = mid, rank, hm
        else:
            hi, rank_hi, h_hi = mid, rank, hm

    theta = h_hi / (h_hi - h_lo)
    return RankingPolicy.from_rankings(D, [rank_lo, rank_hi], [theta, 1.0 - theta])


def solve_policy_lp(u, v, constraint: FairnessConstraint = NO_CONSTRAINT) -> RankingPolicy:
    """Dense LP solution with HiGHS, used to cross-check :func:`solve_policy`.

    Builds all D*m variables explicitly, so it is only suitable for small
    instances. The returned policy carries no ranking decomposition.
    """
    from scipy.optimize import linprog

    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    D, m = len(u), len(v)
    cost = -np.outer(u, v).ravel()
    rows = np.kron(np.eye(D), np.ones((1, m)))
    cols = np.kron(np.ones((1, D)), np.eye(m))

    def run(with_fairness):
        A_eq, b_eq = cols, np.ones(m)
        if with_fairness:
            A_eq = np.vstack([cols, np.outer(constraint.coef, v).ravel()])
            b_eq = np.append(b_eq, 0.0)
        return linprog(cost, A_ub=rows, b_ub=np.ones(D), A_eq=A_eq, b_eq=b_eq,
                       bounds=(0, 1), method="highs")

    dropped = False
    res = run(constraint.kind != NONE)
    if res.status == 2:
        dropped = True
        res = run(False)
    if res.status != 0:
        raise RuntimeError(f"LP solve failed: {res.message}")
    P = np.clip(res.x.reshape(D, m), 0.0, 1.0)
    return RankingPolicy(P, [], np.zeros(0), constraint_dropped=dropped)


def sample_ranking(policy: RankingPolicy, rng: np.random.Generator,
                   return_fallbacks: bool = False):
    """Draw one ranking slot by slot from the policy columns.

    Rows already placed are removed from later columns and the remaining mass
    is renormalized. A column left with no mass falls back to a uniform draw
    over the unused rows; the number of such fallbacks is returned as a
    second value when ``return_fallbacks`` is set.
    """
    P = policy.matrix
    D, m = P.shape
    available = np.ones(D, dtype=bool)
    ranking = np.empty(m, dtype=np.int64)
    fallbacks = 0
    for r in range(m):
        col = np.where(available, P[:, r], 0.0)
        rows = np.flatnonzero(col > 0)
        if rows.size == 0 or col[rows].sum() <= 1e-15:
            fallbacks += 1
            rows = np.flatnonzero(available)
            cdf = np.arange(1, rows.size + 1, dtype=float)
        else:
            cdf = np.cumsum(col[rows])
        j = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        k = int(rows[min(j, rows.size - 1)])
        ranking[r] = k
        available[k] = False
    if return_fallbacks:
        return ranking, fallbacks
    return ranking


def group_exposure(policy: RankingPolicy, v, groups) -> np.ndarray:
    """Total expected exposure ``sum_{d in G} sum_r P[d, r] v_r`` per group."""
    per_candidate = policy.matrix @ np.asarray(v, dtype=float)
    groups = np.asarray(groups)
    return np.array([per_candidate[groups == 0].sum(), per_candidate[groups == 1].sum()])


def expected_exposure_by_group(policy: RankingPolicy, v, groups):
    """Majority and minority shares of the policy's expected exposure."""
    tot = group_exposure(policy, v, groups)
    s = tot.sum()
    return float(tot[0] / s), float(tot[1] / s)
