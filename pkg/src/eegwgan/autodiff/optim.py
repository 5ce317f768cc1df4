"""Adam optimizer with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .functional import ShapeError
from .tensor import Tensor


@dataclass
class AdamState:
    """Per-parameter moment accumulators plus hyperparameters."""

    lr: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.99
    epsilon: float = 1e-8
    step_count: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: list[Tensor], lr: float = 1e-4, beta1: float = 0.5,
                   beta2: float = 0.99, epsilon: float = 1e-8) -> "AdamState":
        return cls(
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
            m=[np.zeros_like(p.data) for p in params],
            v=[np.zeros_like(p.data) for p in params],
        )


def adam_step(params: list[Tensor], grads: list[Tensor], state: AdamState) -> None:
    """One in-place Adam update: m, v moving averages with bias correction."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeError(
            f"parameter/gradient/state length mismatch: {len(params)}/{len(grads)}/{len(state.m)}"
        )
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for i, (p, g) in enumerate(zip(params, grads)):
        gd = g.data
        if gd.shape != p.data.shape:
            raise ShapeError(f"gradient {i} shape {gd.shape} != parameter shape {p.data.shape}")
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * gd
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * gd * gd
        m_hat = state.m[i] / c1
        v_hat = state.v[i] / c2
        p.data -= state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
