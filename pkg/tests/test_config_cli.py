import csv
import json
import shutil

import numpy as np
import pytest

from linkfair import config as cfg
from linkfair.cli import run
from linkfair.metrics import MetricsSeries

TINY = ["--profile", "desk", "--runs", "2", "--t-max", "15", "--sim.n=40", "--sim.m=5"]


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_resolve_defaults_and_profiles():
    s = cfg.resolve()
    assert (s["sim.n"], s["sim.t_max"], s["sim.m"], s["experiment.runs"]) == (1000, 2500, 20, 10)
    assert cfg.arms(s) == ["none", "dp", "dyn"]
    d = cfg.resolve("desk")
    assert (d["sim.n"], d["sim.t_max"], d["sim.m"], d["experiment.runs"]) == (200, 500, 10, 3)
    with pytest.raises(cfg.ConfigError):
        cfg.resolve("laptop")


def test_unknown_keys_rejected():
    with pytest.raises(cfg.ConfigError, match="sim.sizee"):
        cfg.resolve(overrides={"sim.sizee": "3"})
    with pytest.raises(cfg.ConfigError):
        cfg.parse_text("sim.n 1000")
    with pytest.raises(cfg.ConfigError):
        cfg.resolve(overrides={"sim.n": "many"})


def test_file_then_override_precedence(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# comment\nsim.n = 300\nsim.m = 7  # inline\n")
    s = cfg.resolve("desk", cfg.load_file(path), {"sim.m": "9"})
    assert s["sim.n"] == 300 and s["sim.m"] == 9 and s["sim.t_max"] == 500


def test_dump_round_trip():
    s = cfg.resolve("desk", overrides={"sim.snapshot_steps": "0,10", "report.plots": "yes"})
    assert cfg.resolve("paper", cfg.parse_text(cfg.dump(s))) == s
    assert cfg.config_hash(s) == cfg.config_hash(dict(s))


def test_cli_exit_codes(tmp_path, capsys):
    assert run(["simulate", "--out-dir", str(tmp_path / "a"), "--nope.key=1"]) == 1
    assert run(["simulate", "--out-dir", str(tmp_path / "a"), "--sim.m=0", "--t-max", "0"]) == 1
    assert run(["report", str(tmp_path / "missing")]) == 2
    assert run(["mpa-limits", "--resolution", "1", "--out-dir", str(tmp_path / "g")]) == 1
    with pytest.raises(SystemExit):
        run(["simulate", "--out-dir", str(tmp_path), "--intervention", "maybe"])


def test_simulate_byte_identical_and_job_independent(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["simulate", *TINY, "--out-dir", str(a)]) == 0
    assert run(["simulate", *TINY, "--jobs", "2", "--out-dir", str(b)]) == 0
    for arm in ("none", "dp", "dyn"):
        for k in range(2):
            rel = f"{arm}/run_{k}/metrics.csv"
            assert (a / rel).read_bytes() == (b / rel).read_bytes()
    man = json.loads((a / "manifest.json").read_text())
    assert man["arms"] == ["none", "dp", "dyn"] and man["runs"] == 2
    assert len(man["run_seeds"]) == 2 and len(man["outputs"]) == 6
    assert (a / "none/run_0/graph_final.txt").exists()
    first = (a / "none/run_0/metrics.csv").read_text().splitlines()
    assert first[0].startswith("# config_hash=")
    # arms share t=0 rows
    rows = [(a / f"{arm}/run_1/metrics.csv").read_text().splitlines() for arm in ("none", "dyn")]
    i = next(k for k, line in enumerate(rows[0]) if line.startswith("t,"))
    assert rows[0][i + 1] == rows[1][i + 1]


def test_report_means_match_hand_average(tmp_path):
    out = tmp_path / "s"
    assert run(["simulate", *TINY, "--out-dir", str(out)]) == 0
    assert run(["report", str(out)]) == 0
    rows = [r for r in read_rows(out / "report/degree_gap.csv") if r["arm"] == "dp"]
    series = [MetricsSeries.from_csv(out / f"dp/run_{k}/metrics.csv").column("abs_gap")
              for k in range(2)]
    hand = np.mean(series, axis=0)
    se = np.std(series, axis=0, ddof=1) / np.sqrt(2)
    np.testing.assert_allclose([float(r["mean"]) for r in rows], hand, rtol=1e-12)
    np.testing.assert_allclose([float(r["stderr"]) for r in rows], se, rtol=1e-12, atol=1e-15)
    shares = read_rows(out / "report/exposure_and_connection_shares.csv")
    assert {r["arm"] for r in shares} == {"none", "dp", "dyn"}
    feats = read_rows(out / "report/initial_pair_features.csv")
    assert len(feats) == 2 * 4


def test_single_run_zero_stderr_and_t0_report(tmp_path):
    out = tmp_path / "z"
    assert run(["simulate", *TINY, "--runs", "1", "--t-max", "0", "--out-dir", str(out)]) == 0
    assert run(["report", str(out)]) == 0
    for name in ("degree_gap", "majority_degree_share"):
        rows = read_rows(out / f"report/{name}.csv")
        assert {r["t"] for r in rows} == {"0"}
        assert all(float(r["stderr"]) == 0.0 for r in rows)


def test_report_partial_when_arm_missing(tmp_path):
    out = tmp_path / "p"
    assert run(["simulate", *TINY, "--out-dir", str(out)]) == 0
    shutil.rmtree(out / "dyn")
    from linkfair.report import report
    with pytest.warns(UserWarning, match="missing"):
        report(out)
    arms = {r["arm"] for r in read_rows(out / "report/degree_gap.csv")}
    assert arms == {"none", "dp"}


def test_report_plots(tmp_path):
    pytest.importorskip("matplotlib")
    out = tmp_path / "v"
    assert run(["simulate", *TINY, "--runs", "1", "--intervention", "none",
                "--out-dir", str(out)]) == 0
    assert run(["report", str(out), "--plots"]) == 0
    assert (out / "report/degree_gap.svg").read_text().lstrip().startswith("<?xml")


def test_mpa_simulate_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["mpa-simulate", "--variant", "dp", "--runs", "2", "--t-max", "3000",
            "--mpa.stride=1000"]
    assert run([*args, "--out-dir", str(a)]) == 0
    assert run([*args, "--out-dir", str(b)]) == 0
    ta = (a / "dp/seed_0/trajectory.csv").read_bytes()
    assert ta == (b / "dp/seed_0/trajectory.csv").read_bytes()
    body = [l for l in ta.decode().splitlines() if not l.startswith("#")]
    assert body[0] == "t,alpha" and len(body) == 1 + 4
    z = tmp_path / "z"
    assert run(["mpa-simulate", "--variant", "baseline", "--runs", "1", "--t-max", "0",
                "--out-dir", str(z)]) == 0
    body = [l for l in (z / "baseline/seed_0/trajectory.csv").read_text().splitlines()
            if not l.startswith("#")]
    assert len(body) == 2
    rows = read_rows(a / "terminal_alpha.csv")
    assert [r["seed"] for r in rows] == ["0", "1"]


def test_mpa_limits_csv(tmp_path):
    assert run(["mpa-limits", "--r", "0.5", "--resolution", "4", "--out-dir", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "limits_grid.csv")
    assert len(rows) == 16
    for r in rows:
        if r["p0"] == r["p1"]:
            assert float(r["alpha_baseline"]) == 0.5 and float(r["alpha_dp"]) == 0.5
