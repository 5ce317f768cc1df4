"""Finite-difference verification of analytic gradients.

Central differences with step 1e-5 on 64-bit values; error is reported as
max|analytic - numeric| / max(max|numeric|, 1), which stays meaningful for
near-zero gradients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import functional as F
from .tensor import Tensor, grad, record

DEFAULT_STEP = 1e-5


@dataclass
class CheckResult:
    name: str
    rel_err: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.rel_err <= self.tolerance


def numeric_gradient(f: Callable[[Sequence[np.ndarray]], float], arrays: list[np.ndarray],
                     index: int, step: float = DEFAULT_STEP) -> np.ndarray:
    """Central-difference gradient of scalar f w.r.t. arrays[index]."""
    out = np.zeros_like(arrays[index])
    flat = out.reshape(-1)
    target = arrays[index]
    tflat = target.reshape(-1)
    for i in range(tflat.size):
        orig = tflat[i]
        tflat[i] = orig + step
        hi = f(arrays)
        tflat[i] = orig - step
        lo = f(arrays)
        tflat[i] = orig
        flat[i] = (hi - lo) / (2.0 * step)
    return out


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(numeric))), 1.0)
    return float(np.max(np.abs(analytic - numeric))) / scale


def check_gradients(build: Callable[[Sequence[Tensor]], Tensor], arrays: list[np.ndarray],
                    step: float = DEFAULT_STEP) -> float:
    """Compare autodiff gradients of ``build`` against central differences.

    ``build`` maps leaf tensors to a scalar tensor; returns the worst
    relative error across all inputs.
    """
    with record():
        leaves = [Tensor(a.copy()) for a in arrays]
        objective = build(leaves)
        analytic = grad(objective, leaves)

    def f(arrs: Sequence[np.ndarray]) -> float:
        with record():
            return build([Tensor(a.copy()) for a in arrs]).item()

    worst = 0.0
    work = [a.copy() for a in arrays]
    for i in range(len(arrays)):
        numeric = numeric_gradient(f, work, i, step)
        worst = max(worst, relative_error(analytic[i].data, numeric))
    return worst


def _sum_all(t: Tensor) -> Tensor:
    return F.reduce_sum(t)


def _away_from_kink(rng: np.random.Generator, shape, min_abs: float = 1e-3) -> np.ndarray:
    """Random values bounded away from 0 so LeakyReLU stays locally linear."""
    x = rng.normal(0.0, 1.0, shape)
    x = np.where(np.abs(x) < min_abs, np.sign(x) * min_abs * 2 + (x == 0) * min_abs * 2, x)
    return x


def standard_suite(seed: int = 0, configs_per_op: int = 3,
                   op_tol: float = 1e-5, composite_tol: float = 1e-4) -> list[CheckResult]:
    """Gradient checks for every differentiable op plus the penalty composite.

    Each op is exercised at ``configs_per_op`` random shapes/points; the last
    entries cover the interpolate-gradient-norm penalty differentiated through
    a two-layer critic (the grad-of-grad path).
    """
    rng = np.random.default_rng(seed)
    results: list[CheckResult] = []

    def run(name: str, build, arrays, tol=op_tol):
        results.append(CheckResult(name, check_gradients(build, arrays), tol))

    for i in range(configs_per_op):
        b = int(rng.integers(1, 3))
        c = int(rng.integers(1, 4))
        n = int(rng.integers(4, 9))
        x = _away_from_kink(rng, (b, c, n))
        y = rng.normal(0.0, 1.0, (b, c, n))

        run(f"add[{i}]", lambda ts: _sum_all(F.mul(F.add(ts[0], ts[1]), ts[1])), [x, y])
        run(f"mul[{i}]", lambda ts: _sum_all(F.mul(ts[0], ts[1])), [x, y])
        run(f"div[{i}]", lambda ts: _sum_all(F.div(ts[0], ts[1])),
            [x, np.abs(y) + 0.5])
        run(f"power[{i}]", lambda ts: _sum_all(F.power(ts[0], 3.0)), [x])
        run(f"exp[{i}]", lambda ts: _sum_all(F.exp(ts[0])), [x * 0.3])
        run(f"log[{i}]", lambda ts: _sum_all(F.log(ts[0])), [np.abs(x) + 0.5])
        run(f"sqrt[{i}]", lambda ts: _sum_all(F.sqrt(ts[0])), [np.abs(x) + 0.5])
        run(f"leaky_relu[{i}]", lambda ts: _sum_all(F.mul(F.leaky_relu(ts[0], 0.2), ts[1])), [x, y])
        run(f"mean[{i}]", lambda ts: _sum_all(F.mul(F.mean(ts[0], axes=(0, 2), keepdims=True), ts[1])),
            [x, y])
        run(f"broadcast[{i}]", lambda ts: _sum_all(F.mul(F.broadcast_to(F.reshape(ts[0], (1, c, n)), (b, c, n)), ts[1])),
            [x[0], y])

        kw = int(rng.integers(1, min(4, n) + 1))
        co = int(rng.integers(1, 4))
        k = rng.normal(0.0, 1.0, (co, c, kw))
        bias = rng.normal(0.0, 1.0, (co,))
        run(f"conv1d[{i}]", lambda ts: _sum_all(F.power(F.conv1d(ts[0], ts[1], ts[2]), 2.0)),
            [x, k, bias])

        lo = int(rng.integers(1, 5))
        w = rng.normal(0.0, 1.0, (lo, n))
        db = rng.normal(0.0, 1.0, (lo,))
        run(f"dense[{i}]", lambda ts: _sum_all(F.power(F.dense(ts[0], ts[1], ts[2]), 2.0)),
            [x, w, db])

        run(f"avg_pool1d[{i}]", lambda ts: _sum_all(F.power(F.avg_pool1d(ts[0]), 2.0)), [x])

        m = n + int(rng.integers(1, 8))
        run(f"upsample_linear[{i}]", lambda ts: _sum_all(F.power(F.upsample_linear(ts[0], m), 2.0)),
            [x])

        gmm = rng.normal(0.0, 1.0, (c,))
        bt = rng.normal(0.0, 1.0, (c,))

        def bn_obj(ts):
            state = F.BatchNormState()
            out = F.batch_norm1d(ts[0], ts[1], ts[2], state, mode="train")
            return _sum_all(F.power(out, 2.0))

        run(f"batch_norm1d[{i}]", bn_obj, [x, gmm, bt])

    # Gradient-penalty composite: d/dtheta of lambda*(|grad_x C(x)| - 1)^2 on a
    # small two-layer critic, checked against finite differences over theta.
    for i in range(max(1, configs_per_op - 1)):
        b, c, n = 2, 2, 8
        xh = _away_from_kink(rng, (b, c, n))
        k1 = rng.normal(0.0, 0.5, (3, c, 3))
        b1 = rng.normal(0.0, 0.1, (3,))
        w2 = rng.normal(0.0, 0.5, (1, 3 * (n - 2)))
        lam = 10.0

        def gp_obj(ts, xh=xh, lam=lam):
            xt = Tensor(xh.copy())
            h = F.leaky_relu(F.conv1d(xt, ts[0], ts[1]), 0.2)
            flat = F.reshape(h, (b, h.shape[1] * h.shape[2]))
            scores = F.dense(flat, ts[2])
            g = grad(F.reduce_sum(scores), [xt], create_higher_order=True)[0]
            norms = F.sqrt(F.reduce_sum(F.mul(g, g), axes=(1, 2)))
            pen = F.mean(F.power(F.sub(norms, Tensor(np.float64(1.0))), 2.0))
            return F.mul(pen, Tensor(np.float64(lam)))

        def gp_check(arrays):
            # The conv bias cancels out of the input gradient, so its penalty
            # gradient is a structural zero; finite differences agree.
            with record(higher_order=True):
                leaves = [Tensor(a.copy()) for a in arrays]
                analytic = grad(gp_obj(leaves), leaves, allow_unreachable=True)

            def f(arrs):
                with record(higher_order=True):
                    return gp_obj([Tensor(a.copy()) for a in arrs]).item()

            worst = 0.0
            work = [a.copy() for a in arrays]
            for j in range(len(arrays)):
                numeric = numeric_gradient(f, work, j)
                worst = max(worst, relative_error(analytic[j].data, numeric))
            return worst

        results.append(CheckResult(f"gradient_penalty_composite[{i}]",
                                   gp_check([k1, b1, w2]), composite_tol))

    return results
