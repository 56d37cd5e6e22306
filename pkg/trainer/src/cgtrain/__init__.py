from .data import DatasetSplit, Record, load_dataset, make_batch
from .export import emit_golden, export_weights
from .model import PointerTransformer, TrainConfig
from .train import build_model, eval_accuracy, train

__all__ = [
    "DatasetSplit",
    "PointerTransformer",
    "Record",
    "TrainConfig",
    "build_model",
    "emit_golden",
    "eval_accuracy",
    "export_weights",
    "load_dataset",
    "make_batch",
    "train",
]
