"""Logistic connection-probability model.

The log-odds of a pair (s, d) connecting after d is shown to s is

    beta0 + beta1 * netsize(s) + beta2 * common(s, d) + beta3 * sim(s, d) + eps

with every feature scaled into [0, 1] and ``eps ~ N(0, noise_var)``. The same
model produces ranking scores and, with a fresh noise draw, decides whether a
recommended pair actually connects.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .graph import SocialGraph
from .population import Population, similarity_many


@dataclass(frozen=True)
class ScoringParams:
    beta0: float = 0.0
    beta1: float = 50.0
    beta2: float = 50.0
    beta3: float = -5.0
    noise_var: float = 0.1

    def __post_init__(self):
        if self.noise_var < 0:
            raise ValueError("noise_var must be non-negative")

    @property
    def noise_sd(self) -> float:
        return float(np.sqrt(self.noise_var))


@dataclass(frozen=True)
class FeatureNormalizers:
    """Divisors and range used to map raw features into [0, 1].

    ``orientation`` picks how the (non-positive) similarity is mapped:
    ``"magnitude"`` scales the distance ``-similarity``, so 0 is the closest
    observed pair and 1 the farthest; ``"affine"`` maps ``lo -> 0`` and
    ``hi -> 1``, so 1 is the closest pair.
    """

    network_size_divisor: float
    common_conn_divisor: float
    similarity_lo: float
    similarity_hi: float
    orientation: str = "magnitude"

    def __post_init__(self):
        if self.network_size_divisor <= 0 or self.common_conn_divisor <= 0:
            raise ValueError("feature divisors must be positive")
        if not self.similarity_lo < self.similarity_hi:
            raise ValueError("similarity_lo must be below similarity_hi")
        if self.orientation not in ("magnitude", "affine"):
            raise ValueError(f"unknown similarity orientation {self.orientation!r}")

    def scale_similarity(self, sim):
        span = self.similarity_hi - self.similarity_lo
        if self.orientation == "affine":
            x = (np.asarray(sim) - self.similarity_lo) / span
        else:
            x = (self.similarity_hi - np.asarray(sim)) / span
        return np.clip(x, 0.0, 1.0)


def fit_normalizers(population: Population, rng: np.random.Generator,
                    n_pairs: int = 100_000, orientation: str = "magnitude",
                    network_size_divisor: float | None = None,
                    common_conn_divisor: float | None = None) -> FeatureNormalizers:
    """Freeze the similarity range from a sample of member pairs.

    When the population has no more than ``n_pairs`` distinct pairs, every
    pair is used and ``rng`` is not touched.
    """
    n = population.n
    if n < 2:
        raise ValueError("need at least two members")
    if n * (n - 1) // 2 <= n_pairs:
        i, j = np.triu_indices(n, k=1)
    else:
        i = rng.integers(0, n, size=n_pairs)
        j = rng.integers(0, n - 1, size=n_pairs)
        j = j + (j >= i)
    dist = np.linalg.norm(population.covariates[i] - population.covariates[j], axis=1)
    lo, hi = -float(dist.max()), -float(dist.min())
    if lo == hi:
        hi = lo + 1.0
    return FeatureNormalizers(
        network_size_divisor=float(network_size_divisor or n),
        common_conn_divisor=float(common_conn_divisor or n),
        similarity_lo=lo,
        similarity_hi=hi,
        orientation=orientation,
    )


def scaled_features(graph: SocialGraph, population: Population,
                    normalizers: FeatureNormalizers, s: int, d):
    """Scaled ``(netsize(s), common(s, d), sim(s, d))``.

    ``d`` may be a single member or an array of members; the second and third
    entries then follow its shape.
    """
    scalar = np.ndim(d) == 0
    others = np.atleast_1d(np.asarray(d, dtype=np.int64))
    if np.any(others == s):
        raise ValueError("features need s != d")
    netsize = min(max(graph.degree(s) / normalizers.network_size_divisor, 0.0), 1.0)
    common = np.clip(graph.common_connections_many(s, others)
                     / normalizers.common_conn_divisor, 0.0, 1.0)
    sim = normalizers.scale_similarity(similarity_many(population, s, others))
    if scalar:
        return netsize, float(common[0]), float(sim[0])
    return netsize, common, sim


def logit(features, params: ScoringParams) -> np.ndarray:
    netsize, common, sim = features
    return (params.beta0 + params.beta1 * netsize + params.beta2 * np.asarray(common)
            + params.beta3 * np.asarray(sim))


def connection_probability(features, params: ScoringParams, rng=None, eps=None):
    """Logistic connection probability for one or many candidate features.

    Pass either ``rng`` (fresh ``N(0, noise_var)`` noise per entry) or a fixed
    ``eps``; with neither the noise term is zero.
    """
    z = logit(features, params)
    if eps is not None:
        z = z + eps
    elif rng is not None and params.noise_var > 0:
        z = z + rng.normal(0.0, params.noise_sd, size=np.shape(z))
    p = expit(z)
    return float(p) if np.ndim(p) == 0 else p


def score_candidates(graph: SocialGraph, population: Population, params: ScoringParams,
                     normalizers: FeatureNormalizers, s: int, candidates,
                     rng: np.random.Generator | None = None, eps=None) -> np.ndarray:
    """Noisy connection probabilities of ``s`` with each candidate.

    Each candidate gets its own noise draw. ``eps`` overrides the draw with
    explicit per-candidate noise (used by the simulator to index noise by
    member id).
    """
    candidates = np.asarray(candidates, dtype=np.int64)
    if candidates.size == 0:
        return np.zeros(0)
    if np.any(candidates == s):
        raise ValueError(f"member {s} cannot be its own candidate")
    if graph.adjacency[s, candidates].any():
        bad = candidates[graph.adjacency[s, candidates]]
        raise ValueError(f"candidates {bad.tolist()} are already connected to {s}")
    feats = scaled_features(graph, population, normalizers, s, candidates)
    return np.atleast_1d(connection_probability(feats, params, rng=rng, eps=eps))
