"""
Toy next-token task, linear model, optimizer and training loop
"""

from .synth_task import bayes_accuracy, export_dataset, generate, posterior_predict
from .model import ToyModel, backward, forward, init_model
from .optimizer import AdamW, clip_global_norm, lr_at
from .trainer import evaluate, train

__all__ = [
    "bayes_accuracy",
    "export_dataset",
    "generate",
    "posterior_predict",
    "ToyModel",
    "backward",
    "forward",
    "init_model",
    "AdamW",
    "clip_global_norm",
    "lr_at",
    "evaluate",
    "train",
]
