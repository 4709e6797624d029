"""Predictor module - graph transformer, simple-NN baseline, optimizer and training."""

from qupst.predictor.baseline import SimpleNN, init_baseline, simple_nn_forward
from qupst.predictor.checkpoint import Predictor, load_checkpoint, save_checkpoint
from qupst.predictor.graph_transformer import (
    GraphTransformer,
    NeighborSets,
    attention_layer,
    collate,
    forward,
    init_model,
    neighbor_sets,
)
from qupst.predictor.optim import AdamState, adam_step
from qupst.predictor.trainer import backward, grad_check, mse_loss, random_check_sample, train

__all__ = [
    # Models
    "GraphTransformer",
    "NeighborSets",
    "SimpleNN",
    "attention_layer",
    "collate",
    "forward",
    "init_baseline",
    "init_model",
    "neighbor_sets",
    "simple_nn_forward",
    # Persistence
    "Predictor",
    "load_checkpoint",
    "save_checkpoint",
    # Training
    "AdamState",
    "adam_step",
    "backward",
    "grad_check",
    "mse_loss",
    "random_check_sample",
    "train",
]
