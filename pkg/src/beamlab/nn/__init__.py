"""Differentiable-computation substrate: tensors, MLPs, Adam, checkpoints."""

from .autodiff import (
    Tensor,
    add,
    add_bias,
    concat,
    cross_entropy,
    gather_rows,
    matmul,
    relu,
    reshape,
    softmax,
    softmax_cross_entropy,
    sum_axis,
)
from .checkpoint import load_tensors, save_tensors
from .layers import Mlp
from .optim import Adam, restore, snapshot

__all__ = [
    "Tensor", "add", "add_bias", "concat", "cross_entropy", "gather_rows",
    "matmul", "relu", "reshape", "softmax", "softmax_cross_entropy", "sum_axis",
    "Mlp", "Adam", "snapshot", "restore", "save_tensors", "load_tensors",
]
