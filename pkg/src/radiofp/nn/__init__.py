"""Minimal deterministic neural-network engine (numpy, CPU)."""

from .gradcheck import gradient_check, relative_error
from .layers import (
    LayerSpec,
    batch_norm,
    conv1d,
    dense,
    dropout,
    flatten,
    max_pool1d,
    relu,
    residual_block,
    softmax,
)
from .loss import cross_entropy
from .loss import softmax as softmax_probs
from .network import Network
from .optim import SGD
from .tensor import Parameter

__all__ = [
    "LayerSpec",
    "Network",
    "Parameter",
    "SGD",
    "batch_norm",
    "conv1d",
    "cross_entropy",
    "dense",
    "dropout",
    "flatten",
    "gradient_check",
    "max_pool1d",
    "relative_error",
    "relu",
    "residual_block",
    "softmax",
    "softmax_probs",
]
