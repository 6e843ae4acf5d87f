"""Undirected social graph with stochastic-block-model initialization.

Adjacency is a dense boolean matrix; at the simulation scale (n of a few
thousand at most) this keeps edge queries O(1) and row scans vectorized.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SbmParams:
    """Edge probabilities of the two-group stochastic block model."""

    p_within_majority: float = 0.04
    p_within_minority: float = 0.032
    p_cross: float = 0.023

    def __post_init__(self):
        for name in ("p_within_majority", "p_within_minority", "p_cross"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name}={p} is not a probability")


class SocialGraph:
    """Symmetric, loop-free, unweighted graph over members ``0..n-1``."""

    def __init__(self, n: int, adjacency: np.ndarray | None = None):
        if n < 1:
            raise ValueError("graph needs at least one member")
        self.n = int(n)
        if adjacency is None:
            self.adjacency = np.zeros((n, n), dtype=bool)
        else:
            adjacency = np.asarray(adjacency, dtype=bool)
            if adjacency.shape != (n, n):
                raise ValueError(f"adjacency must be {n}x{n}")
            if not np.array_equal(adjacency, adjacency.T):
                raise ValueError("adjacency is not symmetric")
            if adjacency.diagonal().any():
                raise ValueError("adjacency has self-loops")
            self.adjacency = adjacency.copy()
        self.degrees = self.adjacency.sum(axis=1).astype(np.int64)

    def _check(self, v):
        if not 0 <= v < self.n:
            raise IndexError(f"member id {v} out of range for n={self.n}")

    def degree(self, v: int) -> int:
        self._check(v)
        return int(self.degrees[v])

    def has_edge(self, i: int, j: int) -> bool:
        self._check(i)
        self._check(j)
        return bool(self.adjacency[i, j])

    def neighbors(self, v: int) -> np.ndarray:
        self._check(v)
        return np.flatnonzero(self.adjacency[v])

    def non_neighbors(self, v: int) -> np.ndarray:
        """Members not adjacent to ``v``, excluding ``v`` itself, ascending."""
        self._check(v)
        mask = ~self.adjacency[v]
        mask[v] = False
        return np.flatnonzero(mask)

    def common_connections(self, s: int, d: int) -> int:
        """Number of members adjacent to both ``s`` and ``d`` (entry of A^2)."""
        self._check(s)
        self._check(d)
        if s == d:
            raise ValueError("common_connections needs two distinct members")
        return int(np.count_nonzero(self.adjacency[s] & self.adjacency[d]))

    def common_connections_many(self, s: int, others) -> np.ndarray:
        """Vectorized ``common_connections(s, d)`` over ``d in others``."""
        self._check(s)
        others = np.asarray(others, dtype=np.int64)
        if others.size == 0:
            return np.zeros(0, dtype=np.int64)
        return np.count_nonzero(self.adjacency[others] & self.adjacency[s], axis=1)

    def add_edge(self, i: int, j: int) -> bool:
        """Insert edge {i, j}. Returns False when it already existed."""
        self._check(i)
        self._check(j)
        if i == j:
            raise ValueError(f"self-loop requested at member {i}")
        if self.adjacency[i, j]:
            return False
        self.adjacency[i, j] = self.adjacency[j, i] = True
        self.degrees[i] += 1
        self.degrees[j] += 1
        return True

    @property
    def n_edges(self) -> int:
        return int(self.degrees.sum() // 2)

    def edges(self) -> np.ndarray:
        """Array of shape (E, 2) with ``i < j`` rows in lexicographic order."""
        i, j = np.nonzero(np.triu(self.adjacency, k=1))
        return np.column_stack([i, j])

    def copy(self) -> "SocialGraph":
        g = SocialGraph.__new__(SocialGraph)
        g.n = self.n
        g.adjacency = self.adjacency.copy()
        g.degrees = self.degrees.copy()
        return g

    def check_invariants(self):
        a = self.adjacency
        assert np.array_equal(a, a.T), "adjacency not symmetric"
        assert not a.diagonal().any(), "self-loop present"
        assert np.array_equal(self.degrees, a.sum(axis=1)), "degree cache stale"

    def __eq__(self, other):
        if not isinstance(other, SocialGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.adjacency, other.adjacency)

    def __repr__(self):
        return f"SocialGraph(n={self.n}, edges={self.n_edges})"


def sbm_init(n: int, groups, params: SbmParams, rng: np.random.Generator) -> SocialGraph:
    """Sample a two-group stochastic block model graph.

    Parameters
    ----------
    n : int
        Number of members, at least 2.
    groups : array_like of int
        Group label per member, 0 for the majority and 1 for the minority.
    params : SbmParams
        Within-majority, within-minority and cross-group edge probabilities.
    rng : numpy.random.Generator
        Source of randomness; the upper triangle is drawn in one call so a
        fixed seed reproduces the graph exactly.

    Returns
    -------
    SocialGraph
    """
    if n < 2:
        raise ValueError("sbm_init needs n >= 2")
    groups = np.asarray(groups)
    if groups.shape != (n,):
        raise ValueError(f"groups must have length {n}")
    if not isinstance(params, SbmParams):
        params = SbmParams(*params)
    probs = np.array(
        [[params.p_within_majority, params.p_cross],
         [params.p_cross, params.p_within_minority]]
    )
    g = groups.astype(np.intp)
    pair_p = probs[g[:, None], g[None, :]]
    upper = np.triu(rng.random((n, n)) < pair_p, k=1)
    return SocialGraph(n, upper | upper.T)


def write_edgelist(graph: SocialGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n={graph.n}\n")
        for i, j in graph.edges():
            fh.write(f"{i} {j}\n")


def read_edgelist(path) -> SocialGraph:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# n="):
            raise ValueError(f"{path}: missing '# n=<N>' header")
        n = int(header[4:])
        g = SocialGraph(n)
        for line in fh:
            line = line.strip()
            if line:
                i, j = map(int, line.split())
                g.add_edge(i, j)
    return g
