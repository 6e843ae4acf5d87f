"""Per-step experiment records and the summary statistics behind the figures."""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np


@dataclass
class MetricsRecord:
    t: int
    mean_degree_majority: float
    mean_degree_minority: float
    abs_gap: float
    majority_degree_share: float
    new_conn_majority_dest_count: int = 0
    new_degree_majority_count: int = 0
    new_conn_total: int = 0
    expected_exposure_majority_sum: float = 0.0
    expected_exposure_total: float = 0.0
    constraints_dropped_count: int = 0


COLUMNS = tuple(f.name for f in fields(MetricsRecord))
_INT_COLUMNS = {f.name for f in fields(MetricsRecord) if f.type in ("int", int)}


@dataclass
class MetricsSeries:
    records: list
    run_id: int = 0
    intervention: str = "none"

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def append(self, rec: MetricsRecord):
        if self.records and rec.t <= self.records[-1].t:
            raise ValueError("metrics times must be strictly increasing")
        self.records.append(rec)

    def exposure_share(self) -> float:
        """Query-weighted majority share of expected exposure over the run."""
        tot = self.column("expected_exposure_total").sum()
        return float(self.column("expected_exposure_majority_sum").sum() / tot) if tot else math.nan

    def to_csv(self, path, header: dict | None = None) -> None:
        with open(path, "w") as fh:
            for key, val in (header or {}).items():
                fh.write(f"# {key}={val}\n")
            fh.write(f"# run_id={self.run_id}\n# intervention={self.intervention}\n")
            fh.write(",".join(COLUMNS) + "\n")
            for rec in self.records:
                fh.write(",".join(_fmt(x) for x in astuple(rec)) + "\n")

    @classmethod
    def from_csv(cls, path) -> "MetricsSeries":
        meta, records = {}, []
        with open(path) as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line.startswith("#"):
                    key, _, val = line[1:].strip().partition("=")
                    meta[key] = val
                elif line.startswith("t,"):
                    cols = line.split(",")
                    if tuple(cols) != COLUMNS:
                        raise ValueError(f"{path}: unexpected columns {cols}")
                elif line:
                    vals = line.split(",")
                    records.append(MetricsRecord(*(
                        int(v) if c in _INT_COLUMNS else float(v) for c, v in zip(COLUMNS, vals))))
        return cls(records, int(meta.get("run_id", 0)), meta.get("intervention", "none"))


def _fmt(x):
    return str(x) if isinstance(x, (int, np.integer)) else repr(float(x))


def _group_mean_degrees(degrees, groups):
    degrees = np.asarray(degrees)
    groups = np.asarray(groups)
    out = []
    for g in (0, 1):
        sel = degrees[groups == g]
        if sel.size == 0:
            raise ValueError(f"group {g} is empty")
        out.append(sel.mean())
    return out


def gap(graph, population) -> float:
    """Absolute difference of mean degree between majority and minority."""
    d0, d1 = _group_mean_degrees(graph.degrees, population.group)
    return float(abs(d0 - d1))


def majority_degree_share(graph, population) -> float:
    """Fraction of all degree held by majority members."""
    deg = np.asarray(graph.degrees)
    total = deg.sum()
    if total == 0:
        raise ValueError("graph has no edges")
    return float(deg[np.asarray(population.group) == 0].sum() / total)


def snapshot_record(t: int, graph, population, **counts) -> MetricsRecord:
    d0, d1 = _group_mean_degrees(graph.degrees, population.group)
    deg = graph.degrees
    total = deg.sum()
    share = float(deg[population.group == 0].sum() / total) if total else math.nan
    return MetricsRecord(t=t, mean_degree_majority=float(d0), mean_degree_minority=float(d1),
                         abs_gap=float(abs(d0 - d1)), majority_degree_share=share, **counts)


def rolling_mean(series, window: int) -> np.ndarray:
    """Trailing mean over at most ``window`` values; the warm-up uses the prefix."""
    if window < 1:
        raise ValueError("window must be at least 1")
    x = np.asarray(series, dtype=float)
    c = np.concatenate([[0.0], np.cumsum(x)])
    i = np.arange(1, len(x) + 1)
    lo = np.maximum(i - window, 0)
    return (c[i] - c[lo]) / (i - lo)


def rolling_share(numerator, denominator, window: int) -> np.ndarray:
    """Ratio of trailing window sums; NaN where the window holds no events."""
    num = rolling_mean(numerator, window)
    den = rolling_mean(denominator, window)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / den, np.nan)


def degree_histogram_loglog(graph, population):
    """Per-group ``(degree, count)`` pairs for degree >= 1, plus zero-degree counts.

    Returns ``(hist, zeros)`` where ``hist[g]`` is an int array of shape (K, 2)
    and ``zeros[g]`` the number of isolated members of group g.
    """
    deg = np.asarray(graph.degrees)
    groups = np.asarray(population.group)
    hist, zeros = {}, {}
    for g in (0, 1):
        d = deg[groups == g]
        counts = np.bincount(d) if d.size else np.zeros(1, dtype=np.int64)
        k = np.flatnonzero(counts)
        k = k[k >= 1]
        hist[g] = np.column_stack([k, counts[k]]).astype(np.int64)
        zeros[g] = int(counts[0]) if counts.size else 0
    return hist, zeros


def counterfactual_uniform_growth(initial_degrees, final_degrees, groups) -> np.ndarray:
    """Initial degree plus the group's average increase, per member."""
    init = np.asarray(initial_degrees, dtype=float)
    final = np.asarray(final_degrees, dtype=float)
    groups = np.asarray(groups)
    if not init.shape == final.shape == groups.shape:
        raise ValueError("initial, final and groups must be aligned")
    out = init.copy()
    for g in np.unique(groups):
        sel = groups == g
        out[sel] += (final[sel] - init[sel]).mean()
    return out


def tail_exponent(degrees, k_min: int = 10, k_max: int = 100) -> float:
    """Power-law exponent from a least-squares fit of the log CCDF on [k_min, k_max].

    For ``M_k ~ k^-beta`` the CCDF decays as ``k^-(beta - 1)``, so the
    exponent is one minus the fitted slope.
    """
    deg = np.sort(np.asarray(degrees))
    k = np.arange(k_min, k_max + 1)
    ccdf = len(deg) - np.searchsorted(deg, k, side="left")
    ok = ccdf > 0
    if ok.sum() < 2:
        raise ValueError("too few nodes in the fit range")
    slope = np.polyfit(np.log(k[ok]), np.log(ccdf[ok]), 1)[0]
    return float(1.0 - slope)
