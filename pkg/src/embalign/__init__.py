"""embalign: train a linear projection head that aligns a frozen
vision-language embedding space to a frozen LLM-encoder semantic space,
then classify zero-shot by projected cosine similarity."""

__version__ = "0.1.0"

from .classifier import (ClassifierConfig, Prediction, PromptSet,
                         PROMPT_TEMPLATES, build_class_prototypes,
                         pool_frames, predict, predict_batch)
from .errors import (DataError, DimensionError, NumericError,
                     StoreFormatError, ToolkitError, UsageError)
from .losses import (infonce_loss, infonce_loss_as_printed, loss_gradient,
                     mse_loss)
from .metrics import (ConfusionMatrix, EvalReport, per_class_variance,
                      precision_at_k, score)
from .projection import (HeadInit, ProjectionHead, identity_head, init_head,
                         load_head, project, project_batch, save_head)
from .store import (EmbeddingRecord, EmbeddingStore, PairedDataset, SpaceTag,
                    make_pairs, read_store, write_store)
from .synth import SynthSpec, synth_generate, synth_geometry
from .training import TrainConfig, TrainReport, train

__all__ = [
    "ClassifierConfig", "Prediction", "PromptSet", "PROMPT_TEMPLATES",
    "build_class_prototypes", "pool_frames", "predict", "predict_batch",
    "DataError", "DimensionError", "NumericError", "StoreFormatError",
    "ToolkitError", "UsageError",
    "infonce_loss", "infonce_loss_as_printed", "loss_gradient", "mse_loss",
    "ConfusionMatrix", "EvalReport", "per_class_variance", "precision_at_k",
    "score",
    "HeadInit", "ProjectionHead", "identity_head", "init_head", "load_head",
    "project", "project_batch", "save_head",
    "EmbeddingRecord", "EmbeddingStore", "PairedDataset", "SpaceTag",
    "make_pairs", "read_store", "write_store",
    "SynthSpec", "synth_generate", "synth_geometry",
    "TrainConfig", "TrainReport", "train",
]
