"""Write simulation and urn-model experiments to disk.

Layout of a ``simulate`` output directory::

    manifest.json
    <arm>/run_<k>/metrics.csv
    <arm>/run_<k>/graph_initial.txt, graph_final.txt, graph_t<step>.txt
    <arm>/run_<k>/population.csv
    <arm>/run_<k>/summary.json
"""
from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from . import config as cfg
from .graph import write_edgelist
from .mpa import mpa_run
from .population import write_population_csv
from .simulator import run_seed, simulate_run

log = logging.getLogger(__name__)


def run_dir(out_dir, arm: str, run: int) -> Path:
    return Path(out_dir) / arm / f"run_{run}"


def _simulate_one(settings: dict, arm: str, run: int, out_dir: str) -> str:
    conf = cfg.sim_config(settings, arm)
    res = simulate_run(conf, run)
    d = run_dir(out_dir, arm, run)
    d.mkdir(parents=True, exist_ok=True)
    header = {"config_hash": cfg.config_hash(settings),
              "base_seed": conf.base_seed, "run_seed": res.seed,
              "rolling_warmup": "prefix"}
    res.metrics.to_csv(d / "metrics.csv", header=header)
    write_edgelist(res.initial_graph, d / "graph_initial.txt")
    write_edgelist(res.final_graph, d / "graph_final.txt")
    for t, g in sorted(res.snapshots.items()):
        write_edgelist(g, d / f"graph_t{t}.txt")
    write_population_csv(res.population, d / "population.csv")
    nz = res.normalizers
    summary = {
        "arm": arm, "run": run, "run_seed": res.seed,
        "sampling_fallbacks": res.sampling_fallbacks,
        "exposure_share_majority": res.metrics.exposure_share(),
        "normalizers": {"network_size_divisor": nz.network_size_divisor,
                        "common_conn_divisor": nz.common_conn_divisor,
                        "similarity_lo": nz.similarity_lo,
                        "similarity_hi": nz.similarity_hi,
                        "orientation": nz.orientation},
        "group_means": res.population.group_means.tolist(),
    }
    (d / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return str(d)


def _map(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, *t) for t in tasks]
        return [f.result() for f in futures]


def simulate(settings: dict, out_dir, jobs: int = 1) -> Path:
    """Run every requested arm and repetition and write outputs.

    Arms of one repetition share its seed. Output bytes of ``metrics.csv``
    do not depend on ``jobs``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    arm_list = cfg.arms(settings)
    cfg.sim_config(settings)  # validate before spawning work
    runs = settings["experiment.runs"]
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    tasks = [(settings, arm, k, str(out_dir)) for arm in arm_list for k in range(runs)]
    paths = _map(_simulate_one, tasks, jobs)
    base = settings["experiment.base_seed"]
    manifest = {
        "kind": "simulate",
        "code_version": __version__,
        "config": cfg.dump(settings),
        "config_hash": cfg.config_hash(settings),
        "base_seed": base,
        "run_seeds": [run_seed(base, k) for k in range(runs)],
        "arms": arm_list,
        "runs": runs,
        "outputs": [os.path.relpath(p, out_dir) for p in paths],
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return out_dir


def load_manifest(out_dir) -> dict:
    path = Path(out_dir) / "manifest.json"
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run simulate first")
    return json.loads(path.read_text())


def manifest_settings(manifest: dict) -> dict:
    return cfg.resolve("paper", cfg.parse_text(manifest["config"]))


# --------------------------------------------------------------------- MPA

def _mpa_one(settings, variant, seed, out_dir):
    conf = cfg.mpa_config(settings, variant, seed)
    res = mpa_run(conf)
    d = Path(out_dir) / variant / f"seed_{seed}"
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "trajectory.csv", "w") as fh:
        fh.write(f"# config_hash={cfg.config_hash(settings)}\n# seed={seed}\n")
        fh.write("t,alpha\n")
        for t, a in zip(res.times, res.alpha):
            fh.write(f"{int(t)},{float(a)!r}\n")
    groups = res.state.node_groups()
    degrees = res.state.node_degrees()
    with open(d / "final_degrees.csv", "w") as fh:
        fh.write("node,group,degree\n")
        for i, (g, k) in enumerate(zip(groups, degrees)):
            fh.write(f"{i},{int(g)},{int(k)}\n")
    return variant, seed, float(res.alpha[-1])


def mpa_simulate(settings: dict, out_dir, jobs: int = 1) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    variants = cfg.mpa_variants(settings)
    base = settings["mpa.seed"]
    seeds = [base + k for k in range(settings["mpa.runs"])]
    for v in variants:
        cfg.mpa_config(settings, v, base)
    tasks = [(settings, v, s, str(out_dir)) for v in variants for s in seeds]
    finals = _map(_mpa_one, tasks, jobs)
    with open(out_dir / "terminal_alpha.csv", "w") as fh:
        fh.write("variant,seed,alpha_T\n")
        for v, s, a in finals:
            fh.write(f"{v},{s},{a!r}\n")
    summary = {}
    for v in variants:
        vals = np.array([a for vv, _, a in finals if vv == v])
        summary[v] = {"mean": float(vals.mean()),
                      "stderr": float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0}
    manifest = {"kind": "mpa-simulate", "code_version": __version__,
                "config": cfg.dump(settings), "config_hash": cfg.config_hash(settings),
                "seeds": seeds, "variants": variants, "terminal_alpha": summary}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return out_dir
