"""Command-line entry point.

    linkfair simulate --profile desk --out-dir out/desk
    linkfair report out/desk
    linkfair mpa-simulate --out-dir out/mpa
    linkfair mpa-limits --r 0.35 --resolution 50 --out-dir out/limits

Any configuration key can also be given as ``--section.key=value``.
Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import config as cfg

log = logging.getLogger("linkfair")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linkfair", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_help):
        sp.add_argument("--config", help="flat 'section.key = value' file")
        sp.add_argument("--profile", choices=sorted(cfg.PROFILES), default="paper")
        sp.add_argument("--seed", type=int, help=seed_help)
        sp.add_argument("--runs", type=int)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--t-max", type=int)
        sp.add_argument("--out-dir", required=True)

    s = sub.add_parser("simulate", help="run the recommendation loop for each arm")
    common(s, "base seed of the repetitions")
    s.add_argument("--intervention", choices=["none", "dp", "dyn", "all"])

    m = sub.add_parser("mpa-simulate", help="run urn-model trajectories")
    common(m, "first seed; runs use seed, seed+1, ...")
    m.add_argument("--variant", choices=["baseline", "dp", "dynamic", "all"])

    g = sub.add_parser("mpa-limits", help="closed-form limit grid over (p0, p1)")
    g.add_argument("--r", type=float, default=0.35)
    g.add_argument("--resolution", type=int, default=50)
    g.add_argument("--out-dir", required=True)

    r = sub.add_parser("report", help="figure-data tables from simulate outputs")
    r.add_argument("out_dir")
    r.add_argument("--window", type=int, help="rolling window in steps")
    r.add_argument("--plots", action="store_true", help="also write SVG line plots")
    return p


def _extra_overrides(extra) -> dict:
    """Parse leftover ``--section.key=value`` or ``--section.key value`` tokens."""
    out, i = {}, 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or "." not in tok.split("=", 1)[0]:
            raise cfg.ConfigError(f"unrecognized argument {tok!r}")
        key, sep, val = tok[2:].partition("=")
        if not sep:
            if i + 1 >= len(extra):
                raise cfg.ConfigError(f"missing value for {tok}")
            i += 1
            val = extra[i]
        out[key] = val
        i += 1
    return out


def _settings(args, extra) -> dict:
    file_values = cfg.load_file(args.config) if args.config else {}
    over = _extra_overrides(extra)
    prefix = "experiment" if args.command == "simulate" else "mpa"
    tmax_key = "sim.t_max" if args.command == "simulate" else "mpa.t_max"
    seed_key = "experiment.base_seed" if args.command == "simulate" else "mpa.seed"
    if args.seed is not None:
        over[seed_key] = args.seed
    if args.runs is not None:
        over[f"{prefix}.runs"] = args.runs
    if args.t_max is not None:
        over[tmax_key] = args.t_max
    if getattr(args, "intervention", None):
        over["experiment.intervention"] = args.intervention
    if getattr(args, "variant", None):
        over["mpa.variant"] = args.variant
    return cfg.resolve(args.profile, file_values, over)


def run(argv=None) -> int:
    parser = _parser()
    args, extra = parser.parse_known_args(argv)
    try:
        if args.command == "simulate":
            from .experiment import simulate
            out = simulate(_settings(args, extra), args.out_dir, args.jobs)
        elif args.command == "mpa-simulate":
            from .experiment import mpa_simulate
            out = mpa_simulate(_settings(args, extra), args.out_dir, args.jobs)
        elif args.command == "mpa-limits":
            if extra:
                raise cfg.ConfigError(f"unrecognized arguments: {' '.join(extra)}")
            if args.resolution < 2:
                raise cfg.ConfigError("--resolution must be at least 2")
            from .mpa import limits_grid, write_grid_csv
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            write_grid_csv(limits_grid(args.r, args.resolution), out / "limits_grid.csv")
        else:
            if extra:
                raise cfg.ConfigError(f"unrecognized arguments: {' '.join(extra)}")
            from .report import report
            out = report(args.out_dir, window=args.window, plots=args.plots or None)
    except cfg.ConfigError as exc:
        print(f"linkfair: config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        log.debug("runtime failure", exc_info=True)
        print(f"linkfair: error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
