"""Figure-data tables from a finished ``simulate`` output directory.

Every time series is averaged over runs per arm and reported with its
standard error (zero for a single run).
"""
from __future__ import annotations

import csv
import json
import logging
import warnings
from pathlib import Path

import numpy as np

from . import config as cfg
from .experiment import load_manifest, manifest_settings, run_dir
from .graph import read_edgelist
from .metrics import MetricsSeries, counterfactual_uniform_growth, degree_histogram_loglog, rolling_share
from .population import read_population_csv
from .scoring import FeatureNormalizers, ScoringParams, logit

log = logging.getLogger(__name__)

PAIRINGS = {(0, 0): "G0-G0", (1, 1): "G1-G1", (0, 1): "G0-G1", (1, 0): "G1-G0"}


def mean_stderr(rows: np.ndarray):
    """Column-wise mean and standard error over the first axis."""
    rows = np.asarray(rows, dtype=float)
    with warnings.catch_warnings():
        # windows without any new connection are NaN in every run
        warnings.simplefilter("ignore", RuntimeWarning)
        mean = np.nanmean(rows, axis=0)
        if rows.shape[0] < 2:
            return mean, np.zeros_like(mean)
        return mean, np.nanstd(rows, axis=0, ddof=1) / np.sqrt(rows.shape[0])


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])


def load_runs(out_dir, manifest):
    """``{arm: [(run, MetricsSeries), ...]}`` for every run present on disk."""
    found = {}
    for arm in manifest["arms"]:
        for k in range(manifest["runs"]):
            path = run_dir(out_dir, arm, k) / "metrics.csv"
            if path.exists():
                found.setdefault(arm, []).append((k, MetricsSeries.from_csv(path)))
            else:
                warnings.warn(f"missing {path}; report will be partial")
    return found


def _series_table(runs_by_arm, fn):
    out = []
    for arm, runs in runs_by_arm.items():
        series = np.array([fn(ms) for _, ms in runs])
        t = runs[0][1].column("t")
        mean, se = mean_stderr(series)
        out.extend((arm, int(ti), m, s, len(runs)) for ti, m, s in zip(t, mean, se))
    return out


def pair_feature_summary(graph, pop, normalizers: FeatureNormalizers, params: ScoringParams):
    """Mean common connections, similarity and noiseless score per group pairing.

    Averages run over ordered pairs (s, d), s != d, that are not connected.
    """
    A = graph.adjacency.astype(np.int32)
    common = A @ A
    X = pop.covariates
    sq = (X * X).sum(axis=1)
    dist = np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2 * X @ X.T, 0.0))
    sim = -dist
    netsize = np.clip(graph.degrees / normalizers.network_size_divisor, 0, 1)
    feats = (netsize[:, None], np.clip(common / normalizers.common_conn_divisor, 0, 1),
             normalizers.scale_similarity(sim))
    score = 1.0 / (1.0 + np.exp(-logit(feats, params)))
    eligible = ~graph.adjacency & ~np.eye(graph.n, dtype=bool)
    g = pop.group
    rows = []
    for (a, b), name in PAIRINGS.items():
        mask = eligible & (g[:, None] == a) & (g[None, :] == b)
        rows.append((name, common[mask].mean(), sim[mask].mean(), score[mask].mean()))
    return rows


def report(out_dir, window: int | None = None, plots: bool | None = None) -> Path:
    out_dir = Path(out_dir)
    manifest = load_manifest(out_dir)
    settings = manifest_settings(manifest)
    window = window or settings["report.window"]
    plots = settings["report.plots"] if plots is None else plots
    dest = out_dir / "report"
    dest.mkdir(exist_ok=True)
    runs = load_runs(out_dir, manifest)
    if not runs:
        raise FileNotFoundError(f"no metrics.csv files under {out_dir}")
    cols = ["arm", "t", "mean", "stderr", "n_runs"]

    tables = {
        "degree_gap.csv": lambda ms: ms.column("abs_gap"),
        "majority_degree_share.csv": lambda ms: ms.column("majority_degree_share"),
        "rolling_majority_dest_share.csv": lambda ms: rolling_share(
            ms.column("new_conn_majority_dest_count"), ms.column("new_conn_total"), window),
        "rolling_majority_new_degree_share.csv": lambda ms: rolling_share(
            ms.column("new_degree_majority_count"), 2 * ms.column("new_conn_total"), window),
    }
    for name, fn in tables.items():
        _write(dest / name, cols, _series_table(runs, fn))

    rows = []
    for arm, rs in runs.items():
        maj = sum(ms.column("expected_exposure_majority_sum").sum() for _, ms in rs)
        tot = sum(ms.column("expected_exposure_total").sum() for _, ms in rs)
        per_run = np.array([ms.exposure_share() for _, ms in rs])
        m, s = mean_stderr(per_run[:, None])
        dests = sum(ms.column("new_conn_majority_dest_count").sum() for _, ms in rs)
        degs = sum(ms.column("new_degree_majority_count").sum() for _, ms in rs)
        conns = sum(ms.column("new_conn_total").sum() for _, ms in rs)
        rows.append((arm, maj / tot if tot else float("nan"), m[0], s[0],
                     dests / conns if conns else float("nan"),
                     degs / (2 * conns) if conns else float("nan"), len(rs)))
    _write(dest / "exposure_and_connection_shares.csv",
           ["arm", "exposure_share_pooled", "exposure_share_mean", "exposure_share_stderr",
            "dest_share_pooled", "new_degree_share_pooled", "n_runs"], rows)

    params = cfg.sim_config(settings).scoring
    deg_rows, pair_rows, hist_rows, iso_rows, cf_rows = [], [], [], [], []
    for arm, rs in runs.items():
        for k, _ in rs:
            d = run_dir(out_dir, arm, k)
            pop = read_population_csv(d / "population.csv")
            g0 = read_edgelist(d / "graph_initial.txt")
            g1 = read_edgelist(d / "graph_final.txt")
            if arm == next(iter(runs)):
                summary = json.loads((d / "summary.json").read_text())
                norm = FeatureNormalizers(**summary["normalizers"])
                for grp in (0, 1):
                    deg_rows.append((k, grp, g0.degrees[pop.group == grp].mean()))
                for row in pair_feature_summary(g0, pop, norm, params):
                    pair_rows.append((k,) + row)
            hist, zeros = degree_histogram_loglog(g1, pop)
            for grp in (0, 1):
                hist_rows.extend((arm, k, grp, int(a), int(b)) for a, b in hist[grp])
                iso_rows.append((arm, k, grp, zeros[grp]))
            cf = counterfactual_uniform_growth(g0.degrees, g1.degrees, pop.group)
            cf_rows.extend((arm, k, i, int(pop.group[i]), int(g0.degrees[i]),
                            int(g1.degrees[i]), cf[i]) for i in range(pop.n))
    _write(dest / "initial_degree.csv", ["run", "group", "mean_degree"], deg_rows)
    _write(dest / "initial_pair_features.csv",
           ["run", "pairing", "mean_common_connections", "mean_similarity", "mean_score"],
           pair_rows)
    _write(dest / "degree_histogram.csv", ["arm", "run", "group", "degree", "count"],
           hist_rows)
    _write(dest / "isolated_members.csv", ["arm", "run", "group", "count"], iso_rows)
    _write(dest / "counterfactual_degree.csv",
           ["arm", "run", "member_id", "group", "initial_degree", "final_degree",
            "counterfactual_degree"], cf_rows)
    if plots:
        _plot(dest)
    return dest


def _plot(dest: Path):
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    for name, ref in [("degree_gap", None), ("majority_degree_share", 0.65),
                      ("rolling_majority_dest_share", 0.65),
                      ("rolling_majority_new_degree_share", 0.65)]:
        with open(dest / f"{name}.csv") as fh:
            rows = list(csv.DictReader(fh))
        fig, ax = plt.subplots(figsize=(4, 3))
        for arm in dict.fromkeys(r["arm"] for r in rows):
            sel = [r for r in rows if r["arm"] == arm]
            t = np.array([int(r["t"]) for r in sel])
            m = np.array([float(r["mean"]) for r in sel])
            s = np.array([float(r["stderr"]) for r in sel])
            ax.plot(t, m, label=arm)
            ax.fill_between(t, m - s, m + s, alpha=0.2)
        if ref is not None:
            ax.axhline(ref, color="grey", lw=0.8, ls="--")
        ax.set_xlabel("t")
        ax.legend()
        fig.tight_layout()
        fig.savefig(dest / f"{name}.svg")
        plt.close(fig)
