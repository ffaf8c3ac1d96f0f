# utils/snapshot.py
"""
Result files: per-epoch history CSV, sweep CSV and the JSON report summary.

CSVs use the csv module's minimal quoting with LF line endings and a fixed
header; floats are written with repr so a rerun is byte-identical.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

from coordinator.config import HISTORY_HEADER, SWEEP_HEADER
from coordinator.state_schema import RunRecord, TrainHistory
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_history_csv(history: TrainHistory, path: PathLike) -> Path:
    return write_csv(path, HISTORY_HEADER, (record.to_row() for record in history.records))


def write_sweep_csv(records: Iterable[RunRecord], path: PathLike) -> Path:
    ordered = sorted(records, key=lambda r: r.sort_key)
    path = write_csv(path, SWEEP_HEADER, (r.to_row() for r in ordered))
    logger.info(f"wrote {len(ordered)} sweep rows to {path}")
    return path


def read_sweep_csv(path: PathLike) -> List[Dict[str, str]]:
    """Rows of a sweep CSV as dicts; a wrong header or ragged row raises ConfigError naming the line"""
    path = Path(path)
    try:
        f = path.open("r", encoding="utf-8", newline="")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror or e}") from e
    with f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}:1: empty file, expected header") from None
        except csv.Error as e:
            raise ConfigError(f"{path}:1: {e}") from e
        if header != SWEEP_HEADER:
            raise ConfigError(f"{path}:1: unexpected header {','.join(header)}")
        rows = []
        try:
            for fields in reader:
                if len(fields) != len(SWEEP_HEADER):
                    raise ConfigError(f"{path}:{reader.line_num}: expected {len(SWEEP_HEADER)} fields, "
                                      f"got {len(fields)}")
                rows.append(dict(zip(SWEEP_HEADER, fields)))
        except csv.Error as e:
            raise ConfigError(f"{path}:{reader.line_num}: {e}") from e
    return rows


def write_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    return path
