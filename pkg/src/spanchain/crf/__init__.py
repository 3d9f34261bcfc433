"""Linear-chain CRF: scoring, log-partition, constrained Viterbi,
forward-backward marginals, and maximum-likelihood training."""

from .io import load_model, save_model
from .kernels import backend as kernel_backend
from .model import (
    CrfModel,
    EmissionMatrix,
    Gradients,
    TrainConfig,
    TransitionMask,
    dataset_nll,
    legality_mask,
    log_partition,
    marginals,
    nll_and_gradient,
    parse_tag_order,
    score_path,
    train,
    viterbi,
)

__all__ = [
    "CrfModel",
    "EmissionMatrix",
    "Gradients",
    "TrainConfig",
    "TransitionMask",
    "dataset_nll",
    "kernel_backend",
    "legality_mask",
    "load_model",
    "log_partition",
    "marginals",
    "nll_and_gradient",
    "parse_tag_order",
    "save_model",
    "score_path",
    "train",
    "viterbi",
]
