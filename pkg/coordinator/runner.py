import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from datetime import datetime
from typing import Any, Dict, List, Tuple

import numpy as np

from coordinator.config import DEFAULT_JOBS
from coordinator.state_schema import RunRecord, RunStatus, ScedParams, SweepGrid, SynthTaskConfig, TrainConfig
from regularizers.compare import classify_regime
from toy.synth_task import generate
from toy.trainer import evaluate, train
from utils.errors import ConfigError, TrainingDivergedError

logger = logging.getLogger(__name__)

Cell = Tuple[float, float, float, float, int]


def run_cell(task: SynthTaskConfig, base: TrainConfig, cell: Cell) -> RunRecord:
    """Train one grid cell; the cell seed drives both data generation and initialization"""
    alpha, beta, lambda_sced, lambda_kl, seed = cell
    start = time.perf_counter()
    record = RunRecord(alpha=alpha, beta=beta, lambda_sced=lambda_sced, lambda_kl=lambda_kl, seed=seed)
    cell_task = task.model_copy(update={"seed": seed})
    cfg = TrainConfig.from_flat({
        **base.to_flat(),
        "alpha": alpha, "beta": beta, "lambda_sced": lambda_sced, "lambda_kl": lambda_kl, "seed": seed,
    })
    try:
        data = generate(cell_task)
        model, history = train(cell_task, cfg, data=data)
        record.metrics = evaluate(model, data.eval)
        record.loss = history.final.breakdown()
    except TrainingDivergedError as e:
        record.status = RunStatus.DIVERGED
        record.error = str(e)
    record.wall_time_seconds = time.perf_counter() - start
    return record


class SweepRunner:
    """
    Runs every (alpha, beta, lambda_sced, lambda_kl, seed) cell of a grid and
    keeps an execution history of the runs
    """

    def __init__(self, task: SynthTaskConfig, base: TrainConfig, grid: SweepGrid, jobs: int = DEFAULT_JOBS):
        if jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {jobs}")
        self.task = task
        self.base = base
        self.grid = grid
        self.jobs = jobs
        self.execution_history: List[Dict[str, Any]] = []

    def run(self) -> List[RunRecord]:
        """Records sorted by cell, whatever order the workers finish in"""
        cells = list(self.grid.cells())
        logger.info(f"Starting sweep: {len(cells)} runs on {self.jobs} worker(s)")

        records: List[RunRecord] = []
        if self.jobs == 1:
            for cell in cells:
                records.append(self._record(run_cell(self.task, self.base, cell)))
        else:
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                futures = [pool.submit(run_cell, self.task, self.base, cell) for cell in cells]
                for future in as_completed(futures):
                    records.append(self._record(future.result()))

        records.sort(key=lambda r: r.sort_key)
        summary = self.get_execution_summary()
        logger.info(f"Sweep completed - {summary['successful_executions']}/{summary['total_executions']} ok, "
                    f"average run {summary['average_execution_time']:.2f}s")
        return records

    def _record(self, record: RunRecord) -> RunRecord:
        ok = record.status is RunStatus.OK
        regime = classify_regime(ScedParams(alpha=record.alpha, beta=record.beta)).value
        if ok:
            logger.info(f"cell alpha={record.alpha} beta={record.beta} lambda_sced={record.lambda_sced} "
                        f"lambda_kl={record.lambda_kl} seed={record.seed} ({regime}): "
                        f"acc={record.metrics.accuracy:.3f} support={record.metrics.mean_effective_support:.3f}")
        else:
            logger.error(f"cell alpha={record.alpha} beta={record.beta} lambda_sced={record.lambda_sced} "
                         f"lambda_kl={record.lambda_kl} seed={record.seed} failed: {record.error}")
        self.execution_history.append({
            "timestamp": datetime.now().isoformat(),
            "cell": record.sort_key,
            "regime": regime,
            "execution_time": record.wall_time_seconds,
            "success": ok,
        })
        return record

    def get_execution_summary(self) -> Dict[str, Any]:
        """Get summary of all executions"""
        if not self.execution_history:
            return {"message": "No executions recorded", "total_executions": 0,
                    "successful_executions": 0, "average_execution_time": 0.0}

        total = len(self.execution_history)
        successful = sum(1 for ex in self.execution_history if ex["success"])
        return {
            "total_executions": total,
            "successful_executions": successful,
            "success_rate": successful / total,
            "average_execution_time": sum(ex["execution_time"] for ex in self.execution_history) / total,
            "last_execution": self.execution_history[-1]["timestamp"],
        }


# === Report ===

SUMMARY_GROUP = ("alpha", "beta", "lambda_sced", "lambda_kl")


def _float(row: Dict[str, str], name: str, line: int) -> float:
    try:
        value = float(row[name])
    except ValueError:
        raise ConfigError(f"line {line}: {name} is not a number: {row[name]!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"line {line}: {name} is not finite: {row[name]!r}")
    return value


def summarize_sweep_rows(rows: List[Dict[str, str]]) -> List[Dict[str, Any]]:
    """Mean and population std of accuracy and effective support per grid cell, over ok seeds.

    Rows are sweep CSV rows in file order (data line n is file line n + 1).
    """
    groups: Dict[Tuple[float, ...], Dict[str, List[float]]] = {}
    for i, row in enumerate(rows):
        line = i + 2
        if row["status"] not in {s.value for s in RunStatus}:
            raise ConfigError(f"line {line}: unknown status {row['status']!r}")
        key = tuple(_float(row, name, line) for name in SUMMARY_GROUP)
        if row["status"] != RunStatus.OK.value:
            continue
        bucket = groups.setdefault(key, {"accuracy": [], "support": []})
        bucket["accuracy"].append(_float(row, "accuracy", line))
        bucket["support"].append(_float(row, "mean_effective_support", line))

    summary = []
    for key in sorted(groups):
        acc = np.array(groups[key]["accuracy"])
        support = np.array(groups[key]["support"])
        summary.append({
            **dict(zip(SUMMARY_GROUP, key)),
            "n_seeds": int(acc.size),
            "accuracy_mean": float(acc.mean()),
            "accuracy_std": float(acc.std()),
            "effective_support_mean": float(support.mean()),
            "effective_support_std": float(support.std()),
        })
    return summary


def beta_monotonicity_violations(records: List[RunRecord]) -> List[str]:
    """Places where the final sced term rises with beta.

    Runs are grouped by (alpha, lambda_sced, lambda_kl, seed); only ok runs
    with lambda_sced > 0 take part.
    """
    groups: Dict[Tuple[float, float, float, int], List[RunRecord]] = {}
    for record in records:
        if record.status is RunStatus.OK and record.lambda_sced > 0.0 and record.loss is not None:
            key = (record.alpha, record.lambda_sced, record.lambda_kl, record.seed)
            groups.setdefault(key, []).append(record)

    violations = []
    for key in sorted(groups):
        runs = sorted(groups[key], key=lambda r: r.beta)
        for lo, hi in zip(runs, runs[1:]):
            if hi.loss.sced > lo.loss.sced:
                violations.append(
                    f"alpha={key[0]} lambda_sced={key[1]} lambda_kl={key[2]} seed={key[3]}: "
                    f"sced {lo.loss.sced:.6g} at beta={lo.beta} rises to {hi.loss.sced:.6g} at beta={hi.beta}")
    return violations
