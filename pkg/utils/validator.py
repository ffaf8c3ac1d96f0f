# utils/validator.py

import logging
from typing import Optional, Union

import numpy as np

from coordinator.config import ROW_SUM_TOLERANCE
from coordinator.state_schema import ProbViolation, ViolationKind
from utils.errors import DimensionError, InputValidationError, TargetIndexError

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, list, tuple]

# Relative slack on the floor: renormalizing a clamped row can push floored
# entries a hair below the floor itself.
_FLOOR_SLACK = 1e-6


# === Probability Rows ===

def validate(p: ArrayLike, floor: float = 0.0, tol: float = ROW_SUM_TOLERANCE) -> Optional[ProbViolation]:
    """Return the first violated simplex invariant, or None when p is a valid ProbSeq.

    Rows are scanned in order; within a row entries are checked (non-finite,
    below floor, above one) before the row sum.
    """
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 2:
        return ProbViolation(kind=ViolationKind.SHAPE, row=0, magnitude=float(arr.ndim),
                             message=f"expected a T x |V| matrix, got shape {arr.shape}")

    lower = floor * (1.0 - _FLOOR_SLACK)
    nonfinite = ~np.isfinite(arr)
    with np.errstate(invalid="ignore"):
        below = arr < lower
        above = arr > 1.0 + tol
        excess = arr.sum(axis=1) - 1.0
        sum_bad = np.abs(excess) > tol
    entry_bad = nonfinite | below | above
    bad_rows = np.flatnonzero(entry_bad.any(axis=1) | sum_bad)
    if bad_rows.size == 0:
        return None

    t = int(bad_rows[0])
    if entry_bad[t].any():
        v = int(np.flatnonzero(entry_bad[t])[0])
        x = arr[t, v]
        if nonfinite[t, v]:
            return ProbViolation(kind=ViolationKind.NON_FINITE, row=t, column=v, magnitude=float("inf"),
                                 message=f"row {t}, entry {v} is not finite ({x})")
        if below[t, v]:
            return ProbViolation(kind=ViolationKind.BELOW_FLOOR, row=t, column=v,
                                 magnitude=float(floor - x),
                                 message=f"row {t}, entry {v} = {x} is below the floor {floor}")
        return ProbViolation(kind=ViolationKind.ABOVE_ONE, row=t, column=v,
                             magnitude=float(x - 1.0),
                             message=f"row {t}, entry {v} = {x} exceeds 1")
    e = float(excess[t])
    return ProbViolation(kind=ViolationKind.ROW_SUM, row=t, magnitude=e,
                         message=f"row {t} sums to {1.0 + e} (excess {e:+.3g})")


def require_valid(p: ArrayLike, floor: float = 0.0) -> np.ndarray:
    """Precondition guard: return p as a float64 matrix or raise InputValidationError"""
    violation = validate(p, floor=floor)
    if violation is not None:
        raise InputValidationError(violation.message)
    arr = np.asarray(p, dtype=np.float64)
    return arr[np.newaxis, :] if arr.ndim == 1 else arr


# === Targets ===

def check_targets(targets: ArrayLike, steps: int, vocab_size: int) -> np.ndarray:
    """Return targets as an int array of length `steps`, each id in [0, vocab_size)"""
    y = np.asarray(targets)
    if y.ndim == 0:
        y = y[np.newaxis]
    if y.ndim != 1 or y.shape[0] != steps:
        raise DimensionError(f"expected {steps} target ids, got shape {y.shape}")
    if not np.issubdtype(y.dtype, np.integer):
        if not np.all(np.equal(np.mod(y, 1), 0)):
            raise InputValidationError(f"target ids must be integers, got {y.tolist()}")
        y = y.astype(np.int64)
    bad = np.flatnonzero((y < 0) | (y >= vocab_size))
    if bad.size:
        t = int(bad[0])
        raise TargetIndexError(f"target id {int(y[t])} at step {t} outside [0, {vocab_size})")
    return y.astype(np.int64)


def get_validation_summary(violation: Optional[ProbViolation]) -> str:
    if violation is None:
        return "ok"
    return f"{violation.kind.value}: {violation.message}"
