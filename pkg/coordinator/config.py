# scedlab
import os
from typing import Dict, List, Any
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# === NUMERICS ===
# Minimum probability after softmax; keeps the SCED integrand and its gradient finite
PROB_FLOOR = float(os.getenv("SCEDLAB_PROB_FLOOR", "1e-12"))
# Floor for |d| before taking logs in fractional powers
ABS_DIV_FLOOR = 1e-300
# Floor for (1 - P) before raising to beta - 1
ONE_MINUS_P_FLOOR = 1e-12
# |log(P/U)| at or below this counts as exactly uniform for the sign(d) subgradient
UNIFORM_SNAP_TOLERANCE = 1e-12
ROW_SUM_TOLERANCE = 1e-9

# === METRICS ===
DEFAULT_TOPK = int(os.getenv("SCEDLAB_TOPK", "5"))

# === REGULARIZER DEFAULTS ===
# Label smoothing epsilon is not given for the comparison runs; 0.1 is the usual default
DEFAULT_SMOOTHING_EPS = float(os.getenv("SCEDLAB_SMOOTHING_EPS", "0.1"))
DEFAULT_LAMBDA_ENTROPY = 0.1

# === GRADIENT AUDIT ===
GRADCHECK_THRESHOLD = float(os.getenv("SCEDLAB_GRADCHECK_THRESHOLD", "1e-6"))
GRADCHECK_STEP_RANGE = (1e-7, 1e-3)
GRADCHECK_DENOM_FLOOR = 1e-8
KINK_TOLERANCE = 1e-6

GRADCHECK_DEFAULTS: Dict[str, Any] = {
    "alphas": [1.0, 1.5, 2.0],
    "betas": [0.0, 0.5, 1.0, 2.0],
    "lambda_sced": 0.1,
    "lambda_kl": 0.1,
    "instances": 100,
    "max_steps": 4,
    "max_vocab": 16,
    "step": 1e-5,
    "threshold": GRADCHECK_THRESHOLD,
    "seed": 0,
}

# === SYNTHETIC TASK ===
DEFAULT_TASK: Dict[str, Any] = {
    "vocab_size": 16,
    "context_len": 8,
    "relevant_set_size": 4,
    "distractor_noise": 0.0,
    "num_train": 256,
    "num_eval": 256,
    "seed": 0,
}

# === TRAINING PRESETS ===
# Optimizer recipe of the large-model fine-tuning runs
FAITHFUL_PRESET: Dict[str, Any] = {
    "lr": 3e-5,
    "batch_size": 4,
    "epochs": 50,
    "warmup_steps": 500,
    "adam_beta1": 0.9,
    "adam_beta2": 0.999,
    "adam_eps": 1e-8,
    "weight_decay": 0.01,
    "max_grad_norm": 1.0,
    "embed_dim": 16,
    "init_scale": 0.1,
    "alpha": 1.0,
    "beta": 2.0,
    "lambda_sced": 0.05,
    "lambda_kl": 0.1,
    "seed": 0,
}

# A linear toy model does not move at 3e-5; only lr and epochs differ
TOY_PRESET: Dict[str, Any] = {
    **FAITHFUL_PRESET,
    "lr": 1e-2,
    "epochs": 50,
}

# === SWEEP ===
DEFAULT_SWEEP_GRID: Dict[str, List[Any]] = {
    "alphas": [1.0, 1.5, 2.0],
    "betas": [0.0, 0.5, 1.0, 2.0],
    "lambda_sceds": [0.0, 0.05, 0.1],
    "lambda_kls": [0.0, 0.1],
    "seeds": list(range(10)),
}
DEFAULT_JOBS = int(os.getenv("SCEDLAB_JOBS", "1"))

# === OUTPUT FILES ===
BASE_DIR = Path(__file__).parent.parent
CONFIGS_DIR = BASE_DIR / "configs"

HISTORY_HEADER = [
    "epoch", "ce", "sced", "kl", "total",
    "accuracy", "mean_entropy", "mean_effective_support",
]
SWEEP_HEADER = [
    "alpha", "beta", "lambda_sced", "lambda_kl", "seed", "status",
    "accuracy", "mean_entropy", "mean_effective_support", "mean_topk_mass",
    "mean_kl_uniform", "n_items",
    "ce", "sced", "kl", "total",
    "wall_time_seconds",
]

# === LOGGING CONFIGURATION ===
LOGGING_CONFIG = {
    "level": os.getenv("SCEDLAB_LOG_LEVEL", "INFO"),
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
}

# === DEBUG SETTINGS ===
DEBUG_MODE = os.getenv("SCEDLAB_DEBUG", "false").lower() == "true"
