"""Minimal reverse-mode autodiff engine with second-order gradients."""

from .functional import (
    BatchNormState,
    ShapeError,
    add,
    avg_pool1d,
    batch_norm1d,
    broadcast_to,
    conv1d,
    dense,
    div,
    exp,
    flip_last,
    gaussian_sample,
    leaky_relu,
    log,
    matmul,
    mean,
    mul,
    narrow_last,
    neg,
    pad_last,
    power,
    reduce_sum,
    reshape,
    sqrt,
    sub,
    swapaxes,
    upsample_linear,
)
from .optim import AdamState, adam_step
from .tensor import (
    ComputationRecord,
    GradientError,
    RecordError,
    Tensor,
    as_tensor,
    grad,
    no_record,
    record,
)

__all__ = [
    "AdamState",
    "BatchNormState",
    "ComputationRecord",
    "GradientError",
    "RecordError",
    "ShapeError",
    "Tensor",
    "adam_step",
    "add",
    "as_tensor",
    "avg_pool1d",
    "batch_norm1d",
    "broadcast_to",
    "conv1d",
    "dense",
    "div",
    "exp",
    "flip_last",
    "gaussian_sample",
    "grad",
    "leaky_relu",
    "log",
    "matmul",
    "mean",
    "mul",
    "narrow_last",
    "neg",
    "no_record",
    "pad_last",
    "power",
    "record",
    "reduce_sum",
    "reshape",
    "sqrt",
    "sub",
    "swapaxes",
    "upsample_linear",
]
