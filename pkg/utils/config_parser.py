# utils/config_parser.py
"""
Flat `key = value` config files.

    # comment
    lr = 0.01
    alphas = 1, 1.5, 2

Blank lines and `#` comments are ignored; list values are comma separated.
The parser only splits text; type coercion and range checks are done by the
pydantic models, and any failure surfaces as ConfigError.
"""

import logging
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Tuple, Union

from pydantic import ValidationError

from coordinator.config import DEFAULT_TASK, FAITHFUL_PRESET, GRADCHECK_DEFAULTS, TOY_PRESET
from coordinator.state_schema import GradcheckConfig, SweepGrid, SynthTaskConfig, TrainConfig
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

PRESETS: Dict[str, Dict[str, Any]] = {
    "toy": TOY_PRESET,
    "faithful": FAITHFUL_PRESET,
}

TASK_KEYS: FrozenSet[str] = frozenset(k for k in DEFAULT_TASK if k != "seed") | {"task_seed"}
TRAIN_KEYS: FrozenSet[str] = frozenset(TOY_PRESET) | {"objective", "lambda_entropy", "smoothing_eps", "preset"}
GRID_KEYS: FrozenSet[str] = frozenset(SweepGrid.model_fields)
GRADCHECK_KEYS: FrozenSet[str] = frozenset(GRADCHECK_DEFAULTS)
# per-cell values come from the grid, so a sweep file may not pin them
SWEEP_KEYS: FrozenSet[str] = (
    TASK_KEYS | (TRAIN_KEYS - {"alpha", "beta", "lambda_sced", "lambda_kl", "seed"}) | GRID_KEYS | {"jobs"}
)
LIST_KEYS: FrozenSet[str] = frozenset({"alphas", "betas", "lambda_sceds", "lambda_kls", "seeds"})

ConfigValue = Union[str, List[str]]


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, ConfigValue]:
    values: Dict[str, ConfigValue] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: missing key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if key in LIST_KEYS:
            items = [item.strip() for item in value.split(",")]
            if any(not item for item in items):
                raise ConfigError(f"{source}:{lineno}: empty item in list {key!r}")
            values[key] = items
        else:
            values[key] = value
    return values


def parse_config_file(path: Union[str, Path]) -> Dict[str, ConfigValue]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror or e}") from e
    values = parse_config_text(text, source=str(path))
    logger.debug(f"parsed {len(values)} keys from {path}")
    return values


def _reject_unknown(values: Dict[str, ConfigValue], allowed: FrozenSet[str], source: str) -> None:
    unknown = sorted(set(values) - allowed)
    if unknown:
        raise ConfigError(f"{source}: unknown key(s) {', '.join(unknown)}")


def _describe(e: ValidationError) -> str:
    return "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors())


def _split_task(values: Dict[str, ConfigValue]) -> Tuple[Dict[str, Any], Dict[str, Any]]:
    task = {k: v for k, v in values.items() if k in TASK_KEYS}
    rest = {k: v for k, v in values.items() if k not in TASK_KEYS}
    if "task_seed" in task:
        task["seed"] = task.pop("task_seed")
    elif "seed" in rest:
        task["seed"] = rest["seed"]
    return {**DEFAULT_TASK, **task}, rest


def _train_values(values: Dict[str, Any], source: str) -> Dict[str, Any]:
    flat = dict(values)
    preset_name = flat.pop("preset", "toy")
    if preset_name not in PRESETS:
        raise ConfigError(f"{source}: unknown preset {preset_name!r} (choose from {', '.join(PRESETS)})")
    return {**PRESETS[preset_name], **flat}


def build_task_and_train(values: Dict[str, ConfigValue],
                         source: str = "<config>") -> Tuple[SynthTaskConfig, TrainConfig]:
    _reject_unknown(values, TASK_KEYS | TRAIN_KEYS, source)
    task_values, train_values = _split_task(values)
    try:
        return SynthTaskConfig(**task_values), TrainConfig.from_flat(_train_values(train_values, source))
    except ValidationError as e:
        raise ConfigError(f"{source}: {_describe(e)}") from e


def build_gradcheck(values: Dict[str, ConfigValue], source: str = "<config>") -> GradcheckConfig:
    _reject_unknown(values, GRADCHECK_KEYS, source)
    try:
        return GradcheckConfig(**{**GRADCHECK_DEFAULTS, **values})
    except ValidationError as e:
        raise ConfigError(f"{source}: {_describe(e)}") from e


def build_sweep(values: Dict[str, ConfigValue],
                source: str = "<config>") -> Tuple[SynthTaskConfig, TrainConfig, SweepGrid, Dict[str, Any]]:
    """Task, base train recipe (cell values filled in per run), grid, and extras such as jobs"""
    _reject_unknown(values, SWEEP_KEYS, source)
    grid_values = {k: v for k, v in values.items() if k in GRID_KEYS}
    extras = {k: v for k, v in values.items() if k == "jobs"}
    rest = {k: v for k, v in values.items() if k not in GRID_KEYS and k != "jobs"}
    task_values, train_values = _split_task(rest)
    try:
        task = SynthTaskConfig(**task_values)
        base = TrainConfig.from_flat(_train_values(train_values, source))
        grid = SweepGrid(**grid_values)
    except ValidationError as e:
        raise ConfigError(f"{source}: {_describe(e)}") from e
    if "jobs" in extras:
        try:
            extras["jobs"] = int(extras["jobs"])
        except ValueError as e:
            raise ConfigError(f"{source}: jobs must be an integer, got {extras['jobs']!r}") from e
    return task, base, grid, extras


def load_train_config(path: Union[str, Path]) -> Tuple[SynthTaskConfig, TrainConfig]:
    return build_task_and_train(parse_config_file(path), source=str(path))


def load_gradcheck_config(path: Union[str, Path]) -> GradcheckConfig:
    return build_gradcheck(parse_config_file(path), source=str(path))


def load_sweep_config(path: Union[str, Path]) -> Tuple[SynthTaskConfig, TrainConfig, SweepGrid, Dict[str, Any]]:
    return build_sweep(parse_config_file(path), source=str(path))
