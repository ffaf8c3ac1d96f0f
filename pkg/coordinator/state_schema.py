# coordinator/state_schema.py
"""
State Schema Definitions for scedlab
Typed configuration objects, records and enums shared by every package.
Array-valued data (logits, probabilities, model parameters) stays in numpy;
everything that is configured, logged or serialized lives here.
"""

import math
import itertools
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from coordinator.config import DEFAULT_LAMBDA_ENTROPY, DEFAULT_SMOOTHING_EPS, HISTORY_HEADER, SWEEP_HEADER


class Regime(Enum):
    """Special cases of the SCED family"""
    KL_RECOVERY = "kl_recovery"                  # alpha = 1, beta = 0
    POWER_LAW = "power_law"                      # alpha > 1, beta = 0
    SPARSITY_WEIGHTED_KL = "sparsity_weighted_kl"  # alpha = 1, beta > 0
    FULL = "full"                                # alpha > 1, beta > 0


class ObjectiveKind(Enum):
    """Training objectives available to the toy trainer"""
    CAREF = "caref"
    ENTROPY_PENALTY = "entropy_penalty"
    LABEL_SMOOTHING = "label_smoothing"


class RunStatus(Enum):
    OK = "ok"
    DIVERGED = "diverged"


class ViolationKind(Enum):
    """Which simplex invariant a probability row broke"""
    SHAPE = "shape"
    NON_FINITE = "non_finite"
    BELOW_FLOOR = "below_floor"
    ABOVE_ONE = "above_one"
    ROW_SUM = "row_sum"


def format_value(v: Any) -> str:
    """CSV cell text: shortest round-trip repr for floats, plain str otherwise"""
    if v is None:
        return ""
    if isinstance(v, (bool, str, int)):
        return str(v)
    return repr(float(v))


def _finite(v: float) -> float:
    if not math.isfinite(v):
        raise ValueError("value must be finite")
    return v


# === DISTRIBUTION TYPES ===

class Vocab(BaseModel):
    """Vocabulary of |V| token ids"""
    model_config = ConfigDict(frozen=True)

    size: int = Field(..., ge=2)


class UniformPrior(BaseModel):
    """U_v = 1/|V| over a vocabulary; the value is derived once from the size"""
    model_config = ConfigDict(frozen=True)

    vocab: Vocab

    @classmethod
    def of(cls, size: int) -> "UniformPrior":
        return cls(vocab=Vocab(size=size))

    @property
    def size(self) -> int:
        return self.vocab.size

    @property
    def value(self) -> float:
        return 1.0 / self.vocab.size

    @property
    def log_value(self) -> float:
        return math.log(self.value)


class ProbViolation(BaseModel):
    """First invariant a ProbSeq breaks, as reported by utils.validator.validate"""
    kind: ViolationKind
    row: int
    column: Optional[int] = None
    magnitude: float
    message: str


# === REGULARIZER PARAMETERS ===

class ScedParams(BaseModel):
    """(alpha, beta): entropic curvature and adaptive sparsity exponents"""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(1.0, ge=1.0)
    beta: float = Field(0.0, ge=0.0)

    @field_validator("alpha", "beta")
    @classmethod
    def check_finite(cls, v: float) -> float:
        return _finite(v)


class SmoothingEps(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(DEFAULT_SMOOTHING_EPS, ge=0.0, lt=1.0)


class CarefWeights(BaseModel):
    """Mixing coefficients of the composite objective"""
    model_config = ConfigDict(frozen=True)

    lambda_sced: float = Field(0.0, ge=0.0)
    lambda_kl: float = Field(0.0, ge=0.0)

    @field_validator("lambda_sced", "lambda_kl")
    @classmethod
    def check_finite(cls, v: float) -> float:
        return _finite(v)


class RegularizerProfile(BaseModel):
    """One row of the regularizer comparison table"""
    name: str
    differentiable: bool
    sparse: bool
    adaptive: bool
    architecture_free: bool


class ProfileWitness(BaseModel):
    """Empirical evidence for a RegularizerProfile's flags"""
    profile: RegularizerProfile
    observed: Dict[str, bool]
    details: Dict[str, str] = Field(default_factory=dict)

    @property
    def agrees(self) -> bool:
        claimed = self.profile.model_dump()
        return all(claimed[k] == v for k, v in self.observed.items())


# === OBJECTIVE RECORDS ===

class LossBreakdown(BaseModel):
    """Per-term values of one objective evaluation.

    total == ce + lambda_sced*sced + lambda_kl*kl + penalty, where penalty carries
    the already-weighted term of a comparison objective (0 for CAREF).
    """
    ce: float
    sced: float
    kl: float
    total: float
    penalty: float = 0.0

    @classmethod
    def compose(cls, ce: float, sced: float, kl: float, weights: CarefWeights,
                penalty: float = 0.0) -> "LossBreakdown":
        total = ce + weights.lambda_sced * sced + weights.lambda_kl * kl
        if penalty != 0.0:
            total = total + penalty
        return cls(ce=ce, sced=sced, kl=kl, total=total, penalty=penalty)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.ce, self.sced, self.kl, self.total, self.penalty))


class GradReport(BaseModel):
    """Outcome of a finite-difference audit"""
    max_rel_error: float = Field(..., ge=0.0)
    worst_coordinate: Tuple[int, int]
    step_size: float
    n_checked: int = 0
    n_excluded: int = 0


class GradcheckConfig(BaseModel):
    alphas: List[float]
    betas: List[float]
    lambda_sced: float = Field(0.1, ge=0.0)
    lambda_kl: float = Field(0.1, ge=0.0)
    instances: int = Field(100, gt=0)
    max_steps: int = Field(4, gt=0)
    max_vocab: int = Field(16, ge=2)
    step: float = Field(1e-5, gt=0.0)
    threshold: float = Field(1e-6, gt=0.0)
    seed: int = 0

    @field_validator("alphas")
    @classmethod
    def check_alphas(cls, v: List[float]) -> List[float]:
        if not v or any(a < 1.0 for a in v):
            raise ValueError("alphas must be a nonempty list of values >= 1")
        return v

    @field_validator("betas")
    @classmethod
    def check_betas(cls, v: List[float]) -> List[float]:
        if not v or any(b < 0.0 for b in v):
            raise ValueError("betas must be a nonempty list of values >= 0")
        return v


# === TOY TASK & TRAINING ===

class SynthTaskConfig(BaseModel):
    """Synthetic task whose label depends on k decision-relevant positions"""
    model_config = ConfigDict(frozen=True)

    vocab_size: int = Field(16, ge=2)
    context_len: int = Field(8, gt=0)
    relevant_set_size: int = Field(4, gt=0)
    distractor_noise: float = Field(0.0, ge=0.0, lt=1.0)
    num_train: int = Field(256, gt=0)
    num_eval: int = Field(256, gt=0)
    seed: int = 0

    @model_validator(mode="after")
    def check_relevant_set(self) -> "SynthTaskConfig":
        k = self.relevant_set_size
        if k > self.context_len:
            raise ValueError(f"relevant_set_size {k} exceeds context_len {self.context_len}")
        if k > self.vocab_size:
            raise ValueError(f"relevant_set_size {k} exceeds vocab_size {self.vocab_size}")
        return self

    @property
    def vocab(self) -> Vocab:
        return Vocab(size=self.vocab_size)


class TrainConfig(BaseModel):
    """Optimizer recipe + objective settings for one toy training run"""
    model_config = ConfigDict(frozen=True)

    lr: float = Field(1e-2, ge=0.0)
    batch_size: int = Field(4, gt=0)
    epochs: int = Field(50, gt=0)
    warmup_steps: int = Field(500, ge=0)
    adam_beta1: float = Field(0.9, gt=0.0, lt=1.0)
    adam_beta2: float = Field(0.999, gt=0.0, lt=1.0)
    adam_eps: float = Field(1e-8, gt=0.0)
    weight_decay: float = Field(0.01, ge=0.0)
    max_grad_norm: float = Field(1.0, gt=0.0)
    embed_dim: int = Field(16, gt=0)
    init_scale: float = Field(0.1, ge=0.0)
    sced: ScedParams = Field(default_factory=ScedParams)
    weights: CarefWeights = Field(default_factory=CarefWeights)
    objective: ObjectiveKind = ObjectiveKind.CAREF
    lambda_entropy: float = Field(DEFAULT_LAMBDA_ENTROPY, ge=0.0)
    smoothing_eps: float = Field(DEFAULT_SMOOTHING_EPS, ge=0.0, lt=1.0)
    seed: int = 0

    @classmethod
    def from_flat(cls, values: Dict[str, Any]) -> "TrainConfig":
        """Build from a flat key map (alpha/beta/lambda_* at top level)"""
        flat = dict(values)
        sced = {k: flat.pop(k) for k in ("alpha", "beta") if k in flat}
        weights = {k: flat.pop(k) for k in ("lambda_sced", "lambda_kl") if k in flat}
        return cls(**flat, sced=ScedParams(**sced), weights=CarefWeights(**weights))

    def to_flat(self) -> Dict[str, Any]:
        flat = self.model_dump(exclude={"sced", "weights"})
        flat["objective"] = self.objective.value
        flat.update(self.sced.model_dump())
        flat.update(self.weights.model_dump())
        return flat


class EpochRecord(BaseModel):
    epoch: int
    ce: float
    sced: float
    kl: float
    total: float
    penalty: float = 0.0
    accuracy: float
    mean_entropy: float
    mean_effective_support: float
    mean_topk_mass: float
    mean_kl_uniform: float

    def breakdown(self) -> LossBreakdown:
        return LossBreakdown(ce=self.ce, sced=self.sced, kl=self.kl, total=self.total, penalty=self.penalty)

    def to_row(self) -> List[str]:
        return [format_value(getattr(self, name)) for name in HISTORY_HEADER]


class TrainHistory(BaseModel):
    records: List[EpochRecord] = Field(default_factory=list)
    lr_trace: List[float] = Field(default_factory=list)
    grad_norm_trace: List[float] = Field(default_factory=list)
    pre_clip_norm_trace: List[float] = Field(default_factory=list)

    @property
    def final(self) -> EpochRecord:
        return self.records[-1]


# === METRICS ===

class MetricsReport(BaseModel):
    accuracy: float = Field(..., ge=0.0, le=1.0)
    mean_entropy: float
    mean_effective_support: float
    mean_topk_mass: float
    mean_kl_uniform: float
    n_items: int = Field(..., gt=0)
    topk: int = 5


# === SWEEP ===

class SweepGrid(BaseModel):
    """Cartesian (alpha, beta, lambda_sced, lambda_kl) x seeds"""
    alphas: List[float]
    betas: List[float]
    lambda_sceds: List[float]
    lambda_kls: List[float]
    seeds: List[int]

    @model_validator(mode="after")
    def check_lists(self) -> "SweepGrid":
        for name in ("alphas", "betas", "lambda_sceds", "lambda_kls", "seeds"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if any(a < 1.0 for a in self.alphas):
            raise ValueError("alphas must be >= 1")
        for name in ("betas", "lambda_sceds", "lambda_kls"):
            if any(v < 0.0 for v in getattr(self, name)):
                raise ValueError(f"{name} must be >= 0")
        return self

    def cells(self) -> Iterator[Tuple[float, float, float, float, int]]:
        """Every (alpha, beta, lambda_sced, lambda_kl, seed) in sorted order"""
        return itertools.product(
            sorted(self.alphas), sorted(self.betas),
            sorted(self.lambda_sceds), sorted(self.lambda_kls), sorted(self.seeds),
        )

    def __len__(self) -> int:
        return (len(self.alphas) * len(self.betas) * len(self.lambda_sceds)
                * len(self.lambda_kls) * len(self.seeds))


class RunRecord(BaseModel):
    """One sweep cell x seed"""
    alpha: float
    beta: float
    lambda_sced: float
    lambda_kl: float
    seed: int
    status: RunStatus = RunStatus.OK
    metrics: Optional[MetricsReport] = None
    loss: Optional[LossBreakdown] = None
    wall_time_seconds: float = 0.0
    error: Optional[str] = None

    @property
    def sort_key(self) -> Tuple[float, float, float, float, int]:
        return (self.alpha, self.beta, self.lambda_sced, self.lambda_kl, self.seed)

    def to_row(self) -> List[str]:
        values: Dict[str, Any] = {
            "alpha": self.alpha, "beta": self.beta,
            "lambda_sced": self.lambda_sced, "lambda_kl": self.lambda_kl,
            "seed": self.seed, "status": self.status.value,
            "wall_time_seconds": round(self.wall_time_seconds, 6),
        }
        if self.metrics is not None:
            values.update(self.metrics.model_dump(exclude={"topk"}))
        if self.loss is not None:
            values.update(self.loss.model_dump(exclude={"penalty"}))
        return [format_value(values.get(name)) for name in SWEEP_HEADER]


__all__ = [
    "Regime",
    "ObjectiveKind",
    "RunStatus",
    "ViolationKind",
    "Vocab",
    "UniformPrior",
    "ProbViolation",
    "ScedParams",
    "SmoothingEps",
    "CarefWeights",
    "RegularizerProfile",
    "ProfileWitness",
    "LossBreakdown",
    "GradReport",
    "GradcheckConfig",
    "SynthTaskConfig",
    "TrainConfig",
    "EpochRecord",
    "TrainHistory",
    "MetricsReport",
    "SweepGrid",
    "RunRecord",
    "format_value",
]
