"""Differentiable operations for the autodiff engine.

Every primitive defines its vector-Jacobian product in terms of other
differentiable ops, so second-order gradients come out of the same machinery.
Composite ops (dense, batch norm, pooling) are built from primitives and need
no hand-written backward pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .tensor import Tensor, apply_op, as_tensor


class ShapeError(ValueError):
    """Raised when operand shapes violate an operation's contract."""


# Test hook: when nonzero, the conv1d input-gradient is scaled by (1 + fault),
# so a deliberately broken backward pass is detectable by the gradient suite.
_conv1d_backward_fault = 0.0


# ---------------------------------------------------------------------------
# broadcasting helpers
# ---------------------------------------------------------------------------

def _sum_to(t: Tensor, shape: tuple[int, ...]) -> Tensor:
    """Reduce ``t`` back to ``shape`` (the adjoint of numpy broadcasting)."""
    if t.shape == shape:
        return t
    extra = t.ndim - len(shape)
    if extra > 0:
        t = reduce_sum(t, axes=tuple(range(extra)))
    axes = tuple(i for i, (have, want) in enumerate(zip(t.shape, shape)) if want == 1 and have != 1)
    if axes:
        t = reduce_sum(t, axes=axes, keepdims=True)
    return t


# ---------------------------------------------------------------------------
# elementwise arithmetic
# ---------------------------------------------------------------------------

def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data

    def make_vjp():
        return lambda g, needed: (_sum_to(g, a.shape), _sum_to(g, b.shape))

    return apply_op("add", out, (a, b), make_vjp)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data

    def make_vjp():
        return lambda g, needed: (_sum_to(g, a.shape), _sum_to(neg(g), b.shape))

    return apply_op("sub", out, (a, b), make_vjp)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data

    def make_vjp():
        def vjp(g, needed):
            ga = _sum_to(mul(g, b), a.shape) if needed[0] else None
            gb = _sum_to(mul(g, a), b.shape) if needed[1] else None
            return ga, gb

        return vjp

    return apply_op("mul", out, (a, b), make_vjp)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data / b.data

    def make_vjp():
        def vjp(g, needed):
            ga = _sum_to(div(g, b), a.shape) if needed[0] else None
            gb = _sum_to(neg(div(mul(g, a), mul(b, b))), b.shape) if needed[1] else None
            return ga, gb

        return vjp

    return apply_op("div", out, (a, b), make_vjp)


def neg(a) -> Tensor:
    a = as_tensor(a)

    def make_vjp():
        return lambda g, needed: (neg(g),)

    return apply_op("neg", -a.data, (a,), make_vjp)


def power(a, exponent: float) -> Tensor:
    """Elementwise a**exponent for a scalar (non-differentiated) exponent."""
    a = as_tensor(a)
    p = float(exponent)
    out = a.data ** p

    def make_vjp():
        return lambda g, needed: (mul(g, mul(power(a, p - 1.0), Tensor(np.float64(p)))),)

    return apply_op("power", out, (a,), make_vjp)


def exp(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.exp(a.data)

    def make_vjp():
        out_const = Tensor(out_data)
        return lambda g, needed: (mul(g, out_const),)

    return apply_op("exp", out_data, (a,), make_vjp)


def log(a) -> Tensor:
    a = as_tensor(a)

    def make_vjp():
        return lambda g, needed: (div(g, a),)

    return apply_op("log", np.log(a.data), (a,), make_vjp)


def sqrt(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.sqrt(a.data)

    def make_vjp():
        def vjp(g, needed):
            return (div(mul(g, Tensor(np.float64(0.5))), sqrt(a)),)

        return vjp

    return apply_op("sqrt", out_data, (a,), make_vjp)


def leaky_relu(a, alpha: float = 0.2) -> Tensor:
    """x for x >= 0 else alpha*x; slope at exactly 0 is alpha by convention."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    a = as_tensor(a)
    out = np.where(a.data > 0.0, a.data, alpha * a.data)

    def make_vjp():
        # Slope is constant w.r.t. the record: second derivative is 0 a.e.
        slope_const = Tensor(np.where(a.data > 0.0, 1.0, alpha), requires_grad=False)
        return lambda g, needed: (mul(g, slope_const),)

    return apply_op("leaky_relu", out, (a,), make_vjp)


# ---------------------------------------------------------------------------
# reductions and structural ops
# ---------------------------------------------------------------------------

def reduce_sum(a, axes: Optional[tuple[int, ...]] = None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    if axes is None:
        axes = tuple(range(a.ndim))
    elif isinstance(axes, int):
        axes = (axes,)
    axes = tuple(ax % max(a.ndim, 1) for ax in axes)
    out = a.data.sum(axis=axes, keepdims=keepdims)

    def make_vjp():
        def vjp(g, needed):
            if not keepdims:
                kept = [1 if i in axes else s for i, s in enumerate(a.shape)]
                g = reshape(g, tuple(kept))
            return (broadcast_to(g, a.shape),)

        return vjp

    return apply_op("sum", out, (a,), make_vjp)


def mean(a, axes: Optional[tuple[int, ...]] = None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    if axes is None:
        count = a.size
    else:
        if isinstance(axes, int):
            axes = (axes,)
        count = int(np.prod([a.shape[ax] for ax in axes]))
    return mul(reduce_sum(a, axes, keepdims), Tensor(np.float64(1.0 / count)))


def broadcast_to(a, shape: tuple[int, ...]) -> Tensor:
    a = as_tensor(a)
    out = np.broadcast_to(a.data, shape).copy()

    def make_vjp():
        return lambda g, needed: (_sum_to(g, a.shape),)

    return apply_op("broadcast", out, (a,), make_vjp)


def reshape(a, shape: tuple[int, ...]) -> Tensor:
    a = as_tensor(a)
    old_shape = a.shape

    def make_vjp():
        return lambda g, needed: (reshape(g, old_shape),)

    return apply_op("reshape", a.data.reshape(shape), (a,), make_vjp)


def swapaxes(a, axis1: int, axis2: int) -> Tensor:
    # View, not copy: op outputs are never mutated, so aliasing is safe.
    a = as_tensor(a)
    out = np.swapaxes(a.data, axis1, axis2)

    def make_vjp():
        return lambda g, needed: (swapaxes(g, axis1, axis2),)

    return apply_op("swapaxes", out, (a,), make_vjp)


def flip_last(a) -> Tensor:
    a = as_tensor(a)
    out = np.flip(a.data, axis=-1)

    def make_vjp():
        return lambda g, needed: (flip_last(g),)

    return apply_op("flip", out, (a,), make_vjp)


def pad_last(a, before: int, after: int) -> Tensor:
    """Zero-pad the last axis."""
    a = as_tensor(a)
    out = np.zeros(a.shape[:-1] + (before + a.shape[-1] + after,))
    out[..., before : before + a.shape[-1]] = a.data
    length = a.shape[-1]

    def make_vjp():
        return lambda g, needed: (narrow_last(g, before, length),)

    return apply_op("pad", out, (a,), make_vjp)


def narrow_last(a, start: int, length: int) -> Tensor:
    """Slice ``length`` elements of the last axis starting at ``start``."""
    a = as_tensor(a)
    out = np.ascontiguousarray(a.data[..., start : start + length])
    total = a.shape[-1]

    def make_vjp():
        return lambda g, needed: (pad_last(g, start, total - start - length),)

    return apply_op("narrow", out, (a,), make_vjp)


def matmul(a, b) -> Tensor:
    """2-D matrix product; higher-rank handling lives in :func:`dense`."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul expects 2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner axes disagree: {a.shape} @ {b.shape}")
    out = a.data @ b.data

    def make_vjp():
        def vjp(g, needed):
            ga = matmul(g, swapaxes(b, 0, 1)) if needed[0] else None
            gb = matmul(swapaxes(a, 0, 1), g) if needed[1] else None
            return ga, gb

        return vjp

    return apply_op("matmul", out, (a, b), make_vjp)


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------

def _conv1d_data(x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Valid cross-correlation as one batched GEMM over unrolled windows."""
    batch, cin, length = x.shape
    cout, _, kw = k.shape
    if kw == 1:
        return np.matmul(k[:, :, 0], x)
    lout = length - kw + 1
    win = np.lib.stride_tricks.sliding_window_view(x, kw, axis=2)  # [B,Cin,Lout,kw]
    unrolled = np.ascontiguousarray(win.transpose(0, 1, 3, 2)).reshape(batch, cin * kw, lout)
    return np.matmul(k.reshape(cout, cin * kw), unrolled)


def conv1d(x, kernels, bias=None) -> Tensor:
    """Valid 1-D cross-correlation, stride 1, no padding.

    x: [B, Cin, L], kernels: [Cout, Cin, k], bias: [Cout] or None
    -> [B, Cout, L-k+1]
    """
    x, kernels = as_tensor(x), as_tensor(kernels)
    if x.ndim != 3:
        raise ShapeError(f"conv1d input must be [batch, channels, length], got {x.shape}")
    if kernels.ndim != 3:
        raise ShapeError(f"conv1d kernels must be [out, in, width], got {kernels.shape}")
    batch, cin, length = x.shape
    cout, kc, kw = kernels.shape
    if kc != cin:
        raise ShapeError(f"channel axis mismatch: input has {cin} channels, kernels expect {kc}")
    if length < kw:
        raise ShapeError(f"length axis too short: input length {length} < kernel width {kw}")
    inputs: tuple[Tensor, ...]
    if bias is not None:
        bias = as_tensor(bias)
        if bias.shape != (cout,):
            raise ShapeError(f"bias axis mismatch: expected ({cout},), got {bias.shape}")
        out = _conv1d_data(x.data, kernels.data) + bias.data[None, :, None]
        inputs = (x, kernels, bias)
    else:
        out = _conv1d_data(x.data, kernels.data)
        inputs = (x, kernels)

    def make_vjp():
        def vjp(g, needed):
            gx = gk = None
            if needed[0]:
                # d/dx: full correlation of g with the in/out-transposed, flipped kernel.
                gx = conv1d(pad_last(g, kw - 1, kw - 1), flip_last(swapaxes(kernels, 0, 1)))
                if _conv1d_backward_fault:
                    gx = mul(gx, Tensor(np.float64(1.0 + _conv1d_backward_fault)))
            if needed[1]:
                # d/dk: correlate input with g, batch and channel axes exchanged.
                gk = swapaxes(conv1d(swapaxes(x, 0, 1), swapaxes(g, 0, 1)), 0, 1)
            if bias is None:
                return gx, gk
            gb = reduce_sum(g, axes=(0, 2)) if needed[2] else None
            return gx, gk, gb

        return vjp

    return apply_op("conv1d", out, inputs, make_vjp)


# ---------------------------------------------------------------------------
# dense / pooling / resampling
# ---------------------------------------------------------------------------

def dense(x, weight, bias=None) -> Tensor:
    """Affine map over the last axis; leading axes share the weight.

    x: [..., Lin], weight: [Lout, Lin], bias: [Lout] or None -> [..., Lout]
    """
    x, weight = as_tensor(x), as_tensor(weight)
    if weight.ndim != 2:
        raise ShapeError(f"dense weight must be [out, in], got {weight.shape}")
    lout, lin = weight.shape
    if x.shape[-1] != lin:
        raise ShapeError(f"last axis mismatch: input has {x.shape[-1]}, weight expects {lin}")
    lead = x.shape[:-1]
    flat = reshape(x, (int(np.prod(lead)) if lead else 1, lin))
    out = reshape(matmul(flat, swapaxes(weight, 0, 1)), lead + (lout,))
    if bias is not None:
        bias = as_tensor(bias)
        if bias.shape != (lout,):
            raise ShapeError(f"bias axis mismatch: expected ({lout},), got {bias.shape}")
        out = add(out, bias)
    return out


def avg_pool1d(x) -> Tensor:
    """Kernel-2 stride-2 average pooling; a trailing odd element is dropped."""
    x = as_tensor(x)
    if x.ndim != 3:
        raise ShapeError(f"avg_pool1d input must be [batch, channels, length], got {x.shape}")
    length = x.shape[-1]
    if length < 2:
        raise ShapeError(f"length axis too short for pooling: {length}")
    half = length // 2
    trimmed = narrow_last(x, 0, 2 * half)
    pairs = reshape(trimmed, x.shape[:-1] + (half, 2))
    return mul(reduce_sum(pairs, axes=(-1,)), Tensor(np.float64(0.5)))


def _interp_coords(length: int, target: int) -> tuple[np.ndarray, np.ndarray]:
    pos = np.arange(target, dtype=np.float64) * (length - 1) / (target - 1)
    lo = np.minimum(pos.astype(np.int64), length - 2)
    return lo, pos - lo


def upsample_linear(x, target: int) -> Tensor:
    """Endpoint-aligned linear interpolation of the last axis to ``target``."""
    x = as_tensor(x)
    length = x.shape[-1]
    if length < 2:
        raise ShapeError(f"upsample_linear needs source length >= 2, got {length}")
    if target < length:
        raise ShapeError(f"upsample_linear target {target} < source length {length}")
    lo, w = _interp_coords(length, target)
    out = x.data[..., lo] * (1.0 - w) + x.data[..., lo + 1] * w

    def make_vjp():
        return lambda g, needed: (_upsample_linear_adjoint(g, length),)

    return apply_op("upsample_linear", out, (x,), make_vjp)


def _upsample_linear_adjoint(g, length: int) -> Tensor:
    """Adjoint of :func:`upsample_linear`: scatter-add the gathered weights."""
    g = as_tensor(g)
    target = g.shape[-1]
    lo, w = _interp_coords(length, target)
    out = np.zeros(g.shape[:-1] + (length,), dtype=np.float64)
    np.add.at(out, (..., lo), g.data * (1.0 - w))
    np.add.at(out, (..., lo + 1), g.data * w)

    def make_vjp():
        return lambda h: (upsample_linear(h, target),)

    return apply_op("upsample_linear_adjoint", out, (g,), make_vjp)


# ---------------------------------------------------------------------------
# batch normalization
# ---------------------------------------------------------------------------

@dataclass
class BatchNormState:
    """Running statistics for one batch-norm layer (per-channel vectors)."""

    running_mean: Optional[np.ndarray] = None
    running_var: Optional[np.ndarray] = None
    momentum: float = 0.1
    eps: float = 1e-5

    def initialized(self) -> bool:
        return self.running_mean is not None


def batch_norm1d(x, gamma, beta, state: BatchNormState, mode: str = "train") -> Tensor:
    """Per-channel normalization over batch and time for [B, C, L] input.

    Train mode normalizes with batch statistics and updates the running
    exponential moving averages; eval mode uses the stored statistics.
    """
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    if x.ndim != 3:
        raise ShapeError(f"batch_norm1d input must be [batch, channels, length], got {x.shape}")
    batch, channels, length = x.shape
    if gamma.shape != (channels,) or beta.shape != (channels,):
        raise ShapeError(
            f"gamma/beta must match the channel axis ({channels},), got {gamma.shape}/{beta.shape}"
        )
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    g3 = reshape(gamma, (1, channels, 1))
    b3 = reshape(beta, (1, channels, 1))

    if mode == "train":
        n = batch * length
        if n <= 1:
            raise ShapeError("train-mode batch norm needs more than one value per channel")
        mu = mean(x, axes=(0, 2), keepdims=True)
        centered = sub(x, mu)
        var = mean(mul(centered, centered), axes=(0, 2), keepdims=True)
        xhat = div(centered, sqrt(add(var, Tensor(np.float64(state.eps)))))
        out = add(mul(xhat, g3), b3)

        batch_mean = mu.data.reshape(channels)
        batch_var = var.data.reshape(channels) * (n / (n - 1))  # unbiased for running stats
        if not state.initialized():
            state.running_mean = batch_mean.copy()
            state.running_var = batch_var.copy()
        else:
            m = state.momentum
            state.running_mean = (1.0 - m) * state.running_mean + m * batch_mean
            state.running_var = (1.0 - m) * state.running_var + m * batch_var
        return out

    if not state.initialized():
        raise RuntimeError("eval-mode batch norm before any train-mode update: running stats uninitialized")
    rm = Tensor(state.running_mean.reshape(1, channels, 1))
    rv = Tensor(state.running_var.reshape(1, channels, 1))
    xhat = div(sub(x, rm), sqrt(add(rv, Tensor(np.float64(state.eps)))))
    return add(mul(xhat, g3), b3)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def gaussian_sample(shape, mean_: float, std: float, rng: np.random.Generator) -> Tensor:
    """I.i.d. normal draws as a detached tensor; deterministic per rng state."""
    if std < 0:
        raise ValueError(f"std must be nonnegative, got {std}")
    return Tensor(rng.normal(loc=mean_, scale=std, size=shape))


# ---------------------------------------------------------------------------
# operator wiring
# ---------------------------------------------------------------------------

def _radd(a, b):
    return add(b, a)


def _rsub(a, b):
    return sub(b, a)


def _rmul(a, b):
    return mul(b, a)


def _rtruediv(a, b):
    return div(b, a)


Tensor.__add__ = add
Tensor.__radd__ = _radd
Tensor.__sub__ = sub
Tensor.__rsub__ = _rsub
Tensor.__mul__ = mul
Tensor.__rmul__ = _rmul
Tensor.__truediv__ = div
Tensor.__rtruediv__ = _rtruediv
Tensor.__neg__ = neg
Tensor.__pow__ = power
