"""Group labels and member covariates."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

MAJORITY, MINORITY = 0, 1


@dataclass(frozen=True)
class Population:
    group: np.ndarray        # (n,) int8, 0 = majority, 1 = minority
    covariates: np.ndarray   # (n, dim)
    group_means: np.ndarray  # (2, dim)

    @property
    def n(self) -> int:
        return len(self.group)

    @property
    def dim(self) -> int:
        return self.covariates.shape[1]

    def members(self, g: int) -> np.ndarray:
        return np.flatnonzero(self.group == g)

    def __eq__(self, other):
        if not isinstance(other, Population):
            return NotImplemented
        return (np.array_equal(self.group, other.group)
                and np.array_equal(self.covariates, other.covariates)
                and np.array_equal(self.group_means, other.group_means))


def draw_group_means(covariate_dim: int, rng: np.random.Generator) -> np.ndarray:
    """Group means ``mu_0, mu_1`` drawn uniformly from the unit hypercube."""
    return rng.random((2, covariate_dim))


def init_population(n: int, minority_rate: float = 0.35, covariate_dim: int = 30,
                    covariate_var: float = 0.5, rng: np.random.Generator | None = None,
                    group_means: np.ndarray | None = None) -> Population:
    """Assign groups and sample covariates ``X_i ~ N(mu_{G_i}, covariate_var * I)``.

    Exactly ``round(n * minority_rate)`` members are placed in the minority,
    chosen by a random permutation. ``group_means`` may be passed in so that
    one set of means is shared by every run of an experiment suite; otherwise
    it is drawn from ``rng`` first.
    """
    if not 0.0 < minority_rate <= 0.5:
        raise ValueError(f"minority_rate={minority_rate} must lie in (0, 0.5]")
    if covariate_var <= 0:
        raise ValueError(f"covariate_var={covariate_var} must be positive")
    if rng is None:
        rng = np.random.default_rng()
    if group_means is None:
        group_means = draw_group_means(covariate_dim, rng)
    group_means = np.asarray(group_means, dtype=float)
    if group_means.shape != (2, covariate_dim):
        raise ValueError(f"group_means must have shape (2, {covariate_dim})")

    n_minority = int(round(n * minority_rate))
    group = np.zeros(n, dtype=np.int8)
    group[rng.permutation(n)[:n_minority]] = MINORITY
    noise = rng.standard_normal((n, covariate_dim))
    covariates = group_means[group] + np.sqrt(covariate_var) * noise
    return Population(group=group, covariates=covariates, group_means=group_means)


def similarity(pop: Population, s: int, d: int) -> float:
    """Negative Euclidean distance between the covariates of ``s`` and ``d``."""
    return -float(np.linalg.norm(pop.covariates[s] - pop.covariates[d]))


def similarity_many(pop: Population, s: int, others) -> np.ndarray:
    diff = pop.covariates[np.asarray(others, dtype=np.intp)] - pop.covariates[s]
    return -np.linalg.norm(diff, axis=1)


def write_population_csv(pop: Population, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["member_id", "group"] + [f"x_{k}" for k in range(pop.dim)])
        for i in range(pop.n):
            w.writerow([i, int(pop.group[i])] + [repr(float(x)) for x in pop.covariates[i]])


def read_population_csv(path, group_means: np.ndarray | None = None) -> Population:
    """Inverse of :func:`write_population_csv`.

    Group means are not part of the CSV; without ``group_means`` they are
    replaced by the per-group sample means.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    body = rows[1:]
    group = np.array([int(r[1]) for r in body], dtype=np.int8)
    cov = np.array([[float(x) for x in r[2:]] for r in body])
    if group_means is None:
        group_means = np.stack([cov[group == g].mean(axis=0) for g in (0, 1)])
    return Population(group=group, covariates=cov, group_means=np.asarray(group_means))
