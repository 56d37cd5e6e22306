from .config import ModelConfig, count_parameters, parameter_breakdown
from .kernels import attention, layer_norm, softmax
from .model import (
    MACHINE_TOKEN,
    DecodeTrace,
    build_features,
    encode,
    end_token,
    greedy_decode,
    predict_column,
    start_token,
)
from .weights_io import (
    ModelWeights,
    canonical_tensor_specs,
    init_random_weights,
    load_weights,
    read_header,
    save_weights,
    zero_weights,
)

__all__ = [
    "MACHINE_TOKEN",
    "ModelConfig",
    "ModelWeights",
    "DecodeTrace",
    "attention",
    "build_features",
    "canonical_tensor_specs",
    "count_parameters",
    "encode",
    "end_token",
    "greedy_decode",
    "init_random_weights",
    "layer_norm",
    "load_weights",
    "parameter_breakdown",
    "predict_column",
    "read_header",
    "save_weights",
    "softmax",
    "start_token",
    "zero_weights",
]
