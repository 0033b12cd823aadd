"""Compact convolutional seam classifier: layers, training, serialization."""

from .estimator import CnnSeamClassifier
from .model import (
    DESK_ARCHITECTURE,
    ERRONEOUS_INDEX,
    FAULTLESS_INDEX,
    ArchitectureError,
    Model,
    classify,
    forward,
    init_model,
    loss_and_gradients,
)
from .serialize import (
    FORMAT_VERSION,
    ModelFormatError,
    load_model,
    load_model_file,
    save_model,
    save_model_file,
)
from .train import (
    EpochStats,
    FINETUNE_EPOCHS,
    FINETUNE_LEARNING_RATE,
    InMemoryImageStore,
    MissingImageError,
    PgmDirectoryStore,
    TrainConfig,
    TrainingDivergedError,
    TrainResult,
    TrainTrace,
    fit_items,
    predict_items,
    run_seed,
    train,
)

__all__ = [
    "ArchitectureError",
    "CnnSeamClassifier",
    "DESK_ARCHITECTURE",
    "EpochStats",
    "ERRONEOUS_INDEX",
    "FAULTLESS_INDEX",
    "FINETUNE_EPOCHS",
    "FINETUNE_LEARNING_RATE",
    "FORMAT_VERSION",
    "InMemoryImageStore",
    "MissingImageError",
    "Model",
    "ModelFormatError",
    "PgmDirectoryStore",
    "TrainConfig",
    "TrainingDivergedError",
    "TrainResult",
    "TrainTrace",
    "classify",
    "fit_items",
    "forward",
    "init_model",
    "load_model",
    "load_model_file",
    "loss_and_gradients",
    "predict_items",
    "run_seed",
    "save_model",
    "save_model_file",
    "train",
]
