# utils/errors.py
"""
Exception hierarchy shared by every scedlab package.
The CLI maps these onto exit codes (see cli/main.py).
"""

from typing import Any, Dict, Optional


class ScedlabError(Exception):
    """Base class for all library errors"""


class InputValidationError(ScedlabError, ValueError):
    """Array input is malformed or contains non-finite entries"""


class DimensionError(ScedlabError, ValueError):
    """Shapes or vocabulary sizes disagree"""


class TargetIndexError(ScedlabError, IndexError):
    """A target token id lies outside [0, |V|)"""


class ArgumentError(ScedlabError, ValueError):
    """A scalar argument is out of range (k, empty dataset, step size...)"""


class ConfigError(ScedlabError, ValueError):
    """Config file missing, unparseable or semantically invalid"""


class TrainingDivergedError(ScedlabError, RuntimeError):
    """Loss became non-finite during training"""

    def __init__(self, step: int, breakdown: Optional[Dict[str, Any]] = None):
        self.step = step
        self.breakdown = breakdown or {}
        terms = ", ".join(f"{k}={v}" for k, v in self.breakdown.items())
        super().__init__(f"training diverged at step {step}: {terms or 'non-finite loss'}")
