# cli/main.py
"""
scedlab command line

    python -m cli.main gradcheck [--config FILE] [--threshold T]
    python -m cli.main train --config FILE --out DIR
    python -m cli.main sweep --config FILE --out DIR [--jobs N]
    python -m cli.main report (SWEEP_CSV | --config SWEEP_CSV) [--out DIR]
    python -m cli.main compare

Exit codes: 0 success, 1 checked failure (audit failure, divergence,
disagreeing witness), 2 usage, config or I/O error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from rich.console import Console
from rich.logging import RichHandler

from coordinator.config import DEBUG_MODE, DEFAULT_JOBS, GRADCHECK_DEFAULTS, LOGGING_CONFIG
from coordinator.runner import SweepRunner, beta_monotonicity_violations, summarize_sweep_rows
from coordinator.state_schema import GradcheckConfig, RunStatus
from objective.gradcheck import run_gradient_audit
from regularizers.compare import audit_profiles, classify_regime
from toy.model import save_model
from toy.synth_task import export_dataset, generate
from toy.trainer import train
from utils.config_parser import load_gradcheck_config, load_sweep_config, load_train_config
from utils.errors import ArgumentError, ConfigError, TrainingDivergedError
from utils.snapshot import read_sweep_csv, write_history_csv, write_json, write_sweep_csv
from utils.table_formatter import (
    AUDIT_HEADERS,
    PROFILE_HEADERS,
    SUMMARY_HEADERS,
    audit_rows,
    profile_rows,
    render,
    summary_rows,
)

logger = logging.getLogger("scedlab.cli")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def setup_logging(plain: bool) -> None:
    level = logging.DEBUG if DEBUG_MODE else LOGGING_CONFIG["level"]
    if plain:
        logging.basicConfig(level=level, format=LOGGING_CONFIG["format"], stream=sys.stderr, force=True)
    else:
        logging.basicConfig(level=level, format="%(message)s", datefmt="[%X]", force=True,
                            handlers=[RichHandler(console=Console(stderr=True), show_path=False)])


# === Subcommands ===

def cmd_gradcheck(args: argparse.Namespace, console: Console) -> int:
    cfg = load_gradcheck_config(args.config) if args.config else GradcheckConfig(**GRADCHECK_DEFAULTS)
    if args.threshold is not None:
        if not args.threshold > 0.0:
            raise ArgumentError(f"--threshold must be positive, got {args.threshold}")
        cfg = cfg.model_copy(update={"threshold": args.threshold})

    result = run_gradient_audit(cfg)
    rows = audit_rows([(p, r, classify_regime(p).value) for p, r in result.reports])
    render(console, f"Gradient audit: {cfg.instances} instances, h={cfg.step:g}", AUDIT_HEADERS, rows, args.plain)

    params, worst = result.worst
    verdict = "PASS" if result.passed else "FAIL"
    console.print(f"{verdict}: worst relative error {worst.max_rel_error:.3e} at alpha={params.alpha:g} "
                  f"beta={params.beta:g} coordinate {worst.worst_coordinate} "
                  f"(threshold {cfg.threshold:g}); max |row sum| {result.max_row_sum:.2e}",
                  markup=False, highlight=False)
    return EXIT_OK if result.passed else EXIT_FAILURE


def cmd_train(args: argparse.Namespace, console: Console) -> int:
    task, cfg = load_train_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = generate(task)
    export_dataset(data.train, out / "train.tsv")
    export_dataset(data.eval, out / "eval.tsv")

    try:
        model, history = train(task, cfg, data=data)
    except TrainingDivergedError as e:
        logger.error(str(e))
        return EXIT_FAILURE

    write_history_csv(history, out / "history.csv")
    save_model(model, out)
    final = history.final
    console.print(f"trained {len(history.records)} epochs: accuracy {final.accuracy:.4f}, "
                  f"effective support {final.mean_effective_support:.4f}, total loss {final.total:.6f}",
                  markup=False, highlight=False)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, console: Console) -> int:
    task, base, grid, extras = load_sweep_config(args.config)
    jobs = args.jobs if args.jobs is not None else extras.get("jobs", DEFAULT_JOBS)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    runner = SweepRunner(task, base, grid, jobs=jobs)
    records = runner.run()
    path = write_sweep_csv(records, out / "sweep.csv")
    for violation in beta_monotonicity_violations(records):
        logger.warning(f"beta monotonicity: {violation}")
    diverged = sum(1 for r in records if r.status is RunStatus.DIVERGED)
    console.print(f"{len(records)} runs written to {path}; {diverged} diverged", markup=False, highlight=False)
    return EXIT_FAILURE if diverged else EXIT_OK


def cmd_report(args: argparse.Namespace, console: Console) -> int:
    if (args.csv is None) == (args.config is None):
        raise ArgumentError("report needs the sweep CSV either positionally or as --config, not both")
    csv_path = args.csv or args.config
    rows = read_sweep_csv(csv_path)
    try:
        summary = summarize_sweep_rows(rows)
    except ConfigError as e:
        raise ConfigError(f"{csv_path}: {e}") from e
    render(console, f"Sweep summary ({csv_path})", SUMMARY_HEADERS, summary_rows(summary), args.plain)
    if args.out:
        write_json({"source": str(csv_path), "cells": summary}, Path(args.out) / "summary.json")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, console: Console) -> int:
    witnesses = audit_profiles(np.random.default_rng(args.seed))
    render(console, "Distributional regularizers", PROFILE_HEADERS, profile_rows(witnesses), args.plain)
    return EXIT_OK if all(w.agrees for w in witnesses) else EXIT_FAILURE


COMMANDS: Dict[str, Callable[[argparse.Namespace, Console], int]] = {
    "gradcheck": cmd_gradcheck,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "report": cmd_report,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scedlab", description="SCED/CAREF loss audits and toy experiments")
    parser.add_argument("--plain", action="store_true", help="plain text tables and log lines")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gradcheck", help="finite-difference audit of the analytic gradients")
    p.add_argument("--config", help="gradcheck config file (defaults built in)")
    p.add_argument("--threshold", type=float, help="pass/fail bound on the max relative error")

    p = sub.add_parser("train", help="train the toy model once")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("sweep", help="train every cell of an (alpha, beta, lambda) grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, help="concurrent runs")

    p = sub.add_parser("report", help="summarize a sweep CSV")
    p.add_argument("csv", nargs="?", help="sweep.csv written by the sweep command")
    p.add_argument("--config", help="the sweep CSV, as an alternative to the positional argument")
    p.add_argument("--out", help="directory for summary.json")

    p = sub.add_parser("compare", help="regularizer comparison table with empirical witnesses")
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    setup_logging(args.plain)
    console = Console()
    try:
        return COMMANDS[args.command](args, console)
    except (ConfigError, ArgumentError) as e:
        logger.error(str(e))
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
