"""Command-line entry point.

Exit codes: 0 on success, 1 on a configuration error (nothing is written),
2 on a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from dissproj.exceptions import ConfigError, NumericalError
from dissproj.models import ZOO, get_model
from dissproj.xp.config import EXPERIMENTS, load_config, model_to_dict
from dissproj.xp.experiments import run_experiment
from dissproj.xp.io import write_outputs

log = logging.getLogger("dissproj")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dissproj", description="Dissipation-projected dynamics experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--output", help="CSV path; the JSON sidecar goes next to it")
        p.add_argument("--sup-grid", action="store_true", help="also report the sup over a t-grid (scaling)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--tol-kernel", type=float, help="cluster tolerance for the zero eigenvalue group")
        p.add_argument("--quiet", action="store_true", help="only report errors")
        p.add_argument("--plot", action="store_true", help="also render a PNG next to the CSV")
    models = sub.add_parser("models", help="inspect the model zoo")
    msub = models.add_subparsers(dest="action", required=True)
    msub.add_parser("list", help="list model names")
    show = msub.add_parser("show", help="dump a model as JSON")
    show.add_argument("name")
    return parser


def _models(args) -> int:
    if args.action == "list":
        for name in ZOO:
            print(f"{name}\t{get_model(name).description}")
        return EXIT_OK
    spec = get_model(args.name)
    print(json.dumps(model_to_dict(spec), indent=2))
    return EXIT_OK


def _run(args) -> int:
    cfg = load_config(args.config)
    if cfg.experiment != args.command:
        raise ConfigError(f"config is for {cfg.experiment!r}, not {args.command!r}")
    if args.seed is not None:
        cfg.seed = args.seed
    if args.tol_kernel is not None:
        if not args.tol_kernel > 0:
            raise ConfigError("--tol-kernel must be positive")
        cfg.tolerances["kernel"] = args.tol_kernel
    if args.sup_grid:
        cfg.sup_grid = True
    out = Path(args.output or cfg.output_path or f"{cfg.experiment}.csv")
    with np.errstate(over="raise", invalid="raise"):
        result = run_experiment(cfg)
    csv_path, side = write_outputs(result, cfg, out)
    log.info("wrote %s and %s", csv_path, side)
    if result.fit is not None:
        log.info("fit slope %.4f over %s", result.fit["slope"], result.fit["points_used"])
    if args.plot:
        from dissproj.xp.plotting import render

        png = render(result, csv_path.with_suffix(".png"))
        log.info("wrote %s", png)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    quiet = getattr(args, "quiet", False)
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO, format="%(levelname)s: %(message)s")
    try:
        if args.command == "models":
            return _models(args)
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


run_cli = main
