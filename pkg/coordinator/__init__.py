"""
scedlab coordinator package

This package contains:
- config.py: environment-driven settings and training presets
- state_schema.py: shared domain types and records
- runner.py: sweep runner with execution history (import it directly;
  it pulls in the training stack)
"""

from .state_schema import (
    CarefWeights,
    LossBreakdown,
    Regime,
    ScedParams,
    SweepGrid,
    SynthTaskConfig,
    TrainConfig,
)
from .config import (
    PROB_FLOOR,
    FAITHFUL_PRESET,
    TOY_PRESET,
    DEFAULT_SWEEP_GRID,
)

__version__ = "0.1.0"

__all__ = [
    # Typed configs and records
    "CarefWeights",
    "LossBreakdown",
    "Regime",
    "ScedParams",
    "SweepGrid",
    "SynthTaskConfig",
    "TrainConfig",

    # Configuration
    "PROB_FLOOR",
    "FAITHFUL_PRESET",
    "TOY_PRESET",
    "DEFAULT_SWEEP_GRID",
]
