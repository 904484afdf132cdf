"""From-scratch neural network kit on numpy float64 arrays."""

from .checkpoint import (MAGIC_MODEL, MAGIC_NETWORK, read_container,
                         write_container)
from .layers import (LAYER_REGISTRY, Concatenate, Conv1D, Dense, Dropout,
                     Embedding, Flatten, GlobalMaxPool1D, Layer)
from .network import Network
from .train import (AdamState, TrainConfig, TrainResult, adam_step,
                    check_gradients, train_network)

__all__ = [
    "AdamState",
    "Concatenate",
    "Conv1D",
    "Dense",
    "Dropout",
    "Embedding",
    "Flatten",
    "GlobalMaxPool1D",
    "LAYER_REGISTRY",
    "Layer",
    "MAGIC_MODEL",
    "MAGIC_NETWORK",
    "Network",
    "TrainConfig",
    "TrainResult",
    "adam_step",
    "check_gradients",
    "read_container",
    "train_network",
    "write_container",
]
