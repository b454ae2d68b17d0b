"""Gated multi-granularity classifier: layers, losses, gradients, training."""

from .network import (
    ARCHITECTURE_MODES,
    ForwardPass,
    Gate,
    GranularityLayer,
    MgnModel,
    TrainingExample,
    backward,
    batch_loss,
    build_model,
    forward,
    forward_stack,
    joint_loss,
    predict_sentence_label,
    predict_token_classes,
)
from .optim import AdamW
from .training import (
    EpochRecord,
    TrainSettings,
    TrainingLog,
    load_checkpoint,
    save_checkpoint,
    train_model,
)

__all__ = [
    "ARCHITECTURE_MODES",
    "AdamW",
    "EpochRecord",
    "ForwardPass",
    "Gate",
    "GranularityLayer",
    "MgnModel",
    "TrainSettings",
    "TrainingExample",
    "TrainingLog",
    "backward",
    "batch_loss",
    "build_model",
    "forward",
    "forward_stack",
    "joint_loss",
    "load_checkpoint",
    "predict_sentence_label",
    "predict_token_classes",
    "save_checkpoint",
    "train_model",
]
