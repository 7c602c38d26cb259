"""Command-line entry point: ``prefopt {run,tune,interactive,cd-table}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .diagnostics import estimate_cd
from .errors import PrefOptError
from .harness import (
    ExperimentConfig,
    InteractiveConfig,
    apply_tuning,
    interactive_session,
    run_experiment,
    sweep_tuning,
)
from .rng import make_stream


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    overrides = {}
    if getattr(args, "out", None) is not None:
        overrides["output_dir"] = args.out
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        overrides["base_seed"] = args.seed
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def cmd_run(args) -> int:
    cfg = _load(args)
    if cfg.output_dir is None:
        cfg = dataclasses.replace(cfg, output_dir="results")
    result = run_experiment(cfg, parallel=args.parallel)
    for name in result.methods:
        finals = ", ".join(f"{m}={result.mean[name][m][-1]:.4g}" for m in cfg.metrics)
        skipped = len(result.diverged[name])
        print(f"{name}: {finals}" + (f" ({skipped} diverged)" if skipped else ""))
    print(f"outputs written to {cfg.output_dir}")
    return 0


def cmd_tune(args) -> int:
    cfg = _load(args)
    tuned = sweep_tuning(cfg, _floats(args.eta_grid), _floats(args.delta_grid), trials=args.tune_trials, parallel=args.parallel)
    print(json.dumps({name: {"eta": e, "delta": d} for name, (e, d) in tuned.items()}, indent=2))
    if args.write_config:
        tuned_cfg = apply_tuning(cfg, tuned)
        with open(args.write_config, "w", encoding="utf-8") as fh:
            json.dump(tuned_cfg.to_dict(), fh, indent=2)
            fh.write("\n")
    return 0


def cmd_interactive(args) -> int:
    icfg = InteractiveConfig.load(args.config)
    trace = interactive_session(icfg)
    print(f"{trace.status}: {len(trace) - 1} updates, final x = {trace.final_x.tolist()}")
    return 0


def cmd_cd_table(args) -> int:
    print("d,c_d,c_d*sqrt(d)")
    for d in _ints(args.dims):
        cd = estimate_cd(d, args.samples, make_stream(args.seed, "cd-table", d))
        print(f"{d},{cd:.6f},{cd * d**0.5:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prefopt", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--parallel", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("tune", help="grid-search (eta, delta) per method")
    p.add_argument("--config", required=True)
    p.add_argument("--eta-grid", required=True)
    p.add_argument("--delta-grid", required=True)
    p.add_argument("--tune-trials", type=int, default=3)
    p.add_argument("--seed", type=int)
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--write-config", help="write the config with tuned values to this path")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("interactive", help="answer comparisons yourself")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_interactive)

    p = sub.add_parser("cd-table", help="print Monte Carlo estimates of E|u_1|")
    p.add_argument("--dims", default="1,2,3,5,10")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cd_table)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (PrefOptError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
