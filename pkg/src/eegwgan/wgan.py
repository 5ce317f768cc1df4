"""Generator/critic construction, the gradient-penalty Wasserstein loss, and
the training loop.

The generator maps a latent vector through a dense layer, reshapes to
[hidden, base_len], then alternates kernel-3 convolutions (+ batch norm +
leaky ReLU) with linear upsampling to 2L+2, finishing with a kernel-1
convolution to the output channels and a shared dense map over time. The
critic stacks blocks of two kernel-3 convolutions and an average pool
(floor length), ends with a kernel-1 convolution, a per-channel dense score,
and a channel mean. Structural rules (2L+2 upsampling, floor pooling,
conv/pool counts, 5 critic steps per generator step) hold at any size.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator

from . import autodiff as ad
from ._validation import check_rng, check_signal_array
from .autodiff import AdamState, BatchNormState, Tensor, adam_step
from .params import Checkpoint, ModelParams, load_group, read_checkpoint, save_checkpoint

LEAKY_ALPHA = 0.2


class TrainingDiverged(RuntimeError):
    """Raised when a loss goes non-finite; the last checkpoint is preserved."""


# ---------------------------------------------------------------------------
# architectures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorArch:
    """Structure of the generator; defaults are the full-size configuration."""

    latent_dim: int = 500
    hidden_channels: int = 150
    out_channels: int = 64
    out_len: int = 3152
    base_len: int = 54
    n_stages: int = 6

    def layer_plan(self) -> list[tuple]:
        """Layers in order, each with the signal length it produces."""
        plan: list[tuple] = [("dense", self.hidden_channels * self.base_len)]
        length = self.base_len - 2
        plan.append(("conv_bn", length))
        for stage in range(self.n_stages):
            length = 2 * length + 2
            plan.append(("upsample", length))
            length -= 2
            plan.append(("conv_bn", length))
            if stage < self.n_stages - 1:
                length -= 2
                plan.append(("conv_bn", length))
        plan.append(("conv1x1", length))
        plan.append(("dense_time", self.out_len))
        return plan

    def shape_trace(self) -> list[tuple[int, ...]]:
        """Expected per-layer output shapes (sans batch axis)."""
        trace: list[tuple[int, ...]] = []
        for kind, length in self.layer_plan():
            if kind == "dense":
                trace.append((length,))
            elif kind in ("conv_bn", "upsample"):
                trace.append((self.hidden_channels, length))
            else:
                trace.append((self.out_channels, length))
        return trace

    @property
    def pre_output_len(self) -> int:
        return self.layer_plan()[-2][1]

    def validate(self) -> None:
        if min(self.latent_dim, self.hidden_channels, self.out_channels, self.out_len,
               self.n_stages) < 1:
            raise ValueError("all generator dimensions must be positive")
        if self.base_len < 3:
            raise ValueError(f"base_len must be >= 3 for a kernel-3 convolution, got {self.base_len}")
        if self.pre_output_len < self.out_len:
            raise ValueError(
                f"pre-output length {self.pre_output_len} is shorter than out_len "
                f"{self.out_len}; increase base_len or n_stages"
            )


@dataclass(frozen=True)
class CriticArch:
    """Structure of the critic; defaults are the full-size configuration."""

    in_channels: int = 64
    in_len: int = 3152
    hidden_channels: int = 150
    n_blocks: int = 6

    def length_trace(self) -> list[int]:
        """Signal length after every conv/pool, starting at the input."""
        lengths = [self.in_len]
        length = self.in_len
        for _ in range(self.n_blocks):
            length -= 2
            lengths.append(length)
            length -= 2
            lengths.append(length)
            length //= 2
            lengths.append(length)
        return lengths

    @property
    def final_len(self) -> int:
        return self.length_trace()[-1]

    def validate(self) -> None:
        if min(self.in_channels, self.in_len, self.hidden_channels, self.n_blocks) < 1:
            raise ValueError("all critic dimensions must be positive")
        trace = self.length_trace()
        if any(t < 4 for t in trace[:-1]) or trace[-1] < 1:
            raise ValueError(
                f"critic length trace {trace} collapses; reduce n_blocks or increase in_len"
            )


def full_size_arch() -> tuple[GeneratorArch, CriticArch]:
    """The full-size architecture pair (64 channels x 3152 samples)."""
    return GeneratorArch(), CriticArch()


def solve_base_len(out_len: int, n_stages: int, hidden_channels: int,
                   latent_dim: int, out_channels: int) -> int:
    """Smallest base_len whose pre-output length reaches ``out_len``."""
    for base_len in range(3, out_len + 3):
        arch = GeneratorArch(latent_dim, hidden_channels, out_channels, out_len,
                             base_len, n_stages)
        if arch.pre_output_len >= out_len:
            return base_len
    raise ValueError(f"no base_len reaches out_len={out_len} with {n_stages} stages")


def reduced_arch(channels: int, length: int, hidden_channels: int = 16,
                 latent_dim: int = 32, n_stages: int = 2,
                 n_blocks: int = 2) -> tuple[GeneratorArch, CriticArch]:
    """A small architecture pair for the given data shape; every structural
    rule of the full-size net is preserved."""
    base_len = solve_base_len(length, n_stages, hidden_channels, latent_dim, channels)
    gen = GeneratorArch(latent_dim, hidden_channels, channels, length, base_len, n_stages)
    critic = CriticArch(channels, length, hidden_channels, n_blocks)
    gen.validate()
    critic.validate()
    return gen, critic


@dataclass
class TrainConfig:
    """Training regimen; defaults mirror the full-size regimen (desk runs shrink
    iterations, never the structural ratios)."""

    iterations: int = 50_000
    batch_size: int = 32
    n_critic: int = 5
    lambda_gp: float = 10.0
    lr: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.99
    init_std: float = 0.02
    latent_std: float = 0.02
    seed: int = 0
    checkpoint_every: int = 0  # 0: only the final checkpoint

    def validate(self) -> None:
        if self.iterations < 1 or self.batch_size < 1 or self.n_critic < 1:
            raise ValueError("iterations, batch_size, and n_critic must be >= 1")
        if self.lambda_gp < 0 or self.lr <= 0 or self.init_std < 0 or self.latent_std < 0:
            raise ValueError("lambda_gp/init_std/latent_std must be >= 0 and lr > 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")


# ---------------------------------------------------------------------------
# parameter construction
# ---------------------------------------------------------------------------

def build_generator(arch: GeneratorArch, rng, init_std: float = 0.02) -> ModelParams:
    """Gaussian-initialized weights, zero biases, unit batch-norm gains."""
    arch.validate()
    rng = check_rng(rng)
    mp = ModelParams(meta={"kind": "generator", "arch": arch, "init_std": init_std})
    h = arch.hidden_channels
    mp.add_param("dense0.w", rng.normal(0.0, init_std, (h * arch.base_len, arch.latent_dim)))
    mp.add_param("dense0.b", np.zeros(h * arch.base_len))
    conv_idx = 0
    for kind, _ in arch.layer_plan():
        if kind != "conv_bn":
            continue
        mp.add_param(f"conv{conv_idx}.w", rng.normal(0.0, init_std, (h, h, 3)))
        mp.add_param(f"conv{conv_idx}.b", np.zeros(h))
        mp.add_param(f"bn{conv_idx}.gamma", np.ones(h))
        mp.add_param(f"bn{conv_idx}.beta", np.zeros(h))
        mp.add_batch_norm(f"bn{conv_idx}", BatchNormState())
        conv_idx += 1
    mp.add_param("head.w", rng.normal(0.0, init_std, (arch.out_channels, h, 1)))
    mp.add_param("head.b", np.zeros(arch.out_channels))
    mp.add_param("dense_out.w", rng.normal(0.0, init_std, (arch.out_len, arch.pre_output_len)))
    mp.add_param("dense_out.b", np.zeros(arch.out_len))
    return mp


def build_critic(arch: CriticArch, rng, init_std: float = 0.02) -> ModelParams:
    """Gaussian-initialized weights and zero biases; no batch norm anywhere."""
    arch.validate()
    rng = check_rng(rng)
    mp = ModelParams(meta={"kind": "critic", "arch": arch, "init_std": init_std})
    h = arch.hidden_channels
    cin = arch.in_channels
    for block in range(arch.n_blocks):
        for j in range(2):
            mp.add_param(f"block{block}.conv{j}.w", rng.normal(0.0, init_std, (h, cin, 3)))
            mp.add_param(f"block{block}.conv{j}.b", np.zeros(h))
            cin = h
    mp.add_param("head.w", rng.normal(0.0, init_std, (arch.in_channels, h, 1)))
    mp.add_param("head.b", np.zeros(arch.in_channels))
    mp.add_param("score.w", rng.normal(0.0, init_std, (1, arch.final_len)))
    mp.add_param("score.b", np.zeros(1))
    return mp


# ---------------------------------------------------------------------------
# forward passes
# ---------------------------------------------------------------------------

def generator_forward(params: ModelParams, z, mode: str = "train",
                      trace: Optional[list] = None) -> Tensor:
    """Latent [B, latent_dim] -> signals [B, out_channels, out_len]."""
    arch: GeneratorArch = params.meta["arch"]
    z = ad.as_tensor(z)
    if z.ndim != 2 or z.shape[1] != arch.latent_dim:
        raise ad.ShapeError(f"latent must be [batch, {arch.latent_dim}], got {z.shape}")
    batch = z.shape[0]

    def note(t: Tensor) -> Tensor:
        if trace is not None:
            trace.append(t.shape[1:])
        return t

    x = note(ad.dense(z, params["dense0.w"], params["dense0.b"]))
    x = ad.reshape(x, (batch, arch.hidden_channels, arch.base_len))
    conv_idx = 0
    for kind, length in arch.layer_plan():
        if kind == "conv_bn":
            x = ad.conv1d(x, params[f"conv{conv_idx}.w"], params[f"conv{conv_idx}.b"])
            x = ad.batch_norm1d(x, params[f"bn{conv_idx}.gamma"], params[f"bn{conv_idx}.beta"],
                                params.bn_state(f"bn{conv_idx}"), mode=mode)
            x = note(ad.leaky_relu(x, LEAKY_ALPHA))
            conv_idx += 1
        elif kind == "upsample":
            x = note(ad.upsample_linear(x, length))
        elif kind == "conv1x1":
            x = note(ad.conv1d(x, params["head.w"], params["head.b"]))
        elif kind == "dense_time":
            x = note(ad.dense(x, params["dense_out.w"], params["dense_out.b"]))
    return x


def critic_forward(params: ModelParams, x, trace: Optional[list] = None) -> Tensor:
    """Signals [B, in_channels, in_len] -> one score per sample [B]."""
    arch: CriticArch = params.meta["arch"]
    x = ad.as_tensor(x)
    if x.ndim != 3 or x.shape[1:] != (arch.in_channels, arch.in_len):
        raise ad.ShapeError(
            f"critic input must be [batch, {arch.in_channels}, {arch.in_len}], got {x.shape}"
        )
    batch = x.shape[0]

    def note(t: Tensor) -> Tensor:
        if trace is not None:
            trace.append(t.shape[1:])
        return t

    for block in range(arch.n_blocks):
        for j in range(2):
            x = ad.conv1d(x, params[f"block{block}.conv{j}.w"], params[f"block{block}.conv{j}.b"])
            x = note(ad.leaky_relu(x, LEAKY_ALPHA))
        x = note(ad.avg_pool1d(x))
    x = note(ad.conv1d(x, params["head.w"], params["head.b"]))
    per_channel = note(ad.dense(x, params["score.w"], params["score.b"]))  # [B, C, 1]
    score = ad.mean(per_channel, axes=(1, 2))
    return ad.reshape(score, (batch,))


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------

def sample_latent(rng: np.random.Generator, n: int, latent_dim: int, std: float) -> Tensor:
    """Latent batch z ~ N(0, std^2), detached (no gradient flows into z)."""
    z = ad.gaussian_sample((n, latent_dim), 0.0, std, rng)
    z.requires_grad = False
    return z


def interpolate_with_eps(x_real, x_fake, eps) -> Tensor:
    """Convex combination eps*real + (1-eps)*fake with explicit weights."""
    xr = x_real.data if isinstance(x_real, Tensor) else np.asarray(x_real, dtype=np.float64)
    xf = x_fake.data if isinstance(x_fake, Tensor) else np.asarray(x_fake, dtype=np.float64)
    if xr.shape != xf.shape:
        raise ad.ShapeError(f"real/fake shapes disagree: {xr.shape} vs {xf.shape}")
    eps = np.asarray(eps, dtype=np.float64).reshape((-1,) + (1,) * (xr.ndim - 1))
    return Tensor(eps * xr + (1.0 - eps) * xf)


def interpolate(x_real, x_fake, rng) -> Tensor:
    """Per-sample convex combination with eps ~ U[0,1], one per sample."""
    xr = x_real.data if isinstance(x_real, Tensor) else np.asarray(x_real, dtype=np.float64)
    rng = check_rng(rng)
    return interpolate_with_eps(x_real, x_fake, rng.uniform(0.0, 1.0, xr.shape[0]))


def interpolate_gradient_norms(critic, x_hat: Tensor) -> Tensor:
    """Per-sample L2 norm (over channels and time) of d critic / d x_hat.

    ``critic`` is either a critic ModelParams or any callable mapping a
    [B, C, L] tensor to per-sample scores. Requires an active higher-order
    record, since the result feeds back into the critic's own loss.
    """
    score_fn = critic if callable(critic) else lambda x: critic_forward(critic, x)
    scores = score_fn(x_hat)
    g = ad.grad(ad.reduce_sum(scores), [x_hat], create_higher_order=True)[0]
    return ad.sqrt(ad.reduce_sum(ad.mul(g, g), axes=tuple(range(1, g.ndim))))


def gradient_penalty(critic, x_hat: Tensor, lambda_gp: float) -> Tensor:
    """lambda * mean_batch (|grad_{x_hat} C(x_hat)|_2 - 1)^2."""
    norms = interpolate_gradient_norms(critic, x_hat)
    shifted = ad.sub(norms, Tensor(np.float64(1.0)))
    return ad.mul(ad.mean(ad.mul(shifted, shifted)), Tensor(np.float64(lambda_gp)))


def _critic_loss_parts(critic: ModelParams, x_real, fake_data: np.ndarray,
                       lambda_gp: float, rng) -> tuple[Tensor, dict]:
    xr = np.asarray(x_real, dtype=np.float64)
    if xr.shape != fake_data.shape:
        raise ad.ShapeError(f"real/fake batch shapes disagree: {xr.shape} vs {fake_data.shape}")
    c_real = critic_forward(critic, Tensor(xr, requires_grad=False))
    c_fake = critic_forward(critic, Tensor(fake_data, requires_grad=False))
    x_hat = interpolate(xr, fake_data, rng)
    norms = interpolate_gradient_norms(critic, x_hat)
    shifted = ad.sub(norms, Tensor(np.float64(1.0)))
    penalty = ad.mul(ad.mean(ad.mul(shifted, shifted)), Tensor(np.float64(lambda_gp)))
    mean_real = ad.mean(c_real)
    mean_fake = ad.mean(c_fake)
    loss = ad.add(ad.sub(mean_fake, mean_real), penalty)
    parts = {
        "wasserstein": float(mean_real.data - mean_fake.data),
        "grad_norm": float(norms.data.mean()),
        "penalty": float(penalty.data),
    }
    return loss, parts


def critic_loss(critic: ModelParams, gen: ModelParams, x_real, z, lambda_gp: float, rng) -> Tensor:
    """mean C(fake) - mean C(real) + gradient penalty; fakes are constants
    for the critic update (no gradient reaches the generator)."""
    with ad.no_record():
        fake = generator_forward(gen, Tensor(np.asarray(z, dtype=np.float64),
                                             requires_grad=False), mode="train")
    loss, _ = _critic_loss_parts(critic, x_real, fake.data, lambda_gp, rng)
    return loss


def generator_loss(critic: ModelParams, gen: ModelParams, z) -> Tensor:
    """-mean C(G(z)): minimizing raises the critic's score of fakes."""
    fake = generator_forward(gen, ad.as_tensor(z), mode="train")
    return ad.neg(ad.mean(critic_forward(critic, fake)))


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

class _BatchStream:
    """Shuffled minibatch indices; reshuffles each pass, fixed batch size."""

    def __init__(self, n: int, batch_size: int, rng: np.random.Generator):
        self.n = n
        self.batch_size = batch_size
        self.rng = rng
        self._queue: list[int] = []

    def next_indices(self) -> np.ndarray:
        while len(self._queue) < self.batch_size:
            self._queue.extend(self.rng.permutation(self.n).tolist())
        out = self._queue[: self.batch_size]
        del self._queue[: self.batch_size]
        return np.asarray(out)


METRIC_FIELDS = ("iteration", "critic_loss", "gen_loss", "wasserstein_estimate", "mean_grad_norm")


def write_metrics_csv(path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=METRIC_FIELDS)
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def _arch_manifest(gen_arch: GeneratorArch, critic_arch: CriticArch) -> dict:
    return {"generator": asdict(gen_arch), "critic": asdict(critic_arch)}


def train(data, config: TrainConfig, gen_arch: Optional[GeneratorArch] = None,
          critic_arch: Optional[CriticArch] = None, out_dir=None,
          callbacks: Sequence[Callable[[dict], None]] = ()) -> tuple[Checkpoint, list[dict]]:
    """WGAN-GP training: n_critic critic updates, then one generator update.

    ``data`` is a [N, C, L] array (or a Dataset with ``.stack()``). Omitted
    architectures default to the full-size pair when the data is 64 x 3152
    and to a reduced pair otherwise. Returns the final checkpoint plus
    per-iteration metric rows; with ``out_dir`` set, also writes
    ``checkpoint.ckpt``, ``metrics.csv``, and periodic snapshots. A non-finite
    loss raises :class:`TrainingDiverged`, leaving the newest on-disk
    checkpoint in place.
    """
    if hasattr(data, "stack"):
        data = data.stack()
    data = check_signal_array(data, name="training data")
    config.validate()
    n, channels, length = data.shape

    if gen_arch is None or critic_arch is None:
        if (channels, length) == (64, 3152):
            default_g, default_c = full_size_arch()
        else:
            default_g, default_c = reduced_arch(channels, length)
        gen_arch = gen_arch or default_g
        critic_arch = critic_arch or default_c
    if (gen_arch.out_channels, gen_arch.out_len) != (channels, length):
        raise ValueError(
            f"generator produces {gen_arch.out_channels} x {gen_arch.out_len}, "
            f"data is {channels} x {length}"
        )
    if (critic_arch.in_channels, critic_arch.in_len) != (channels, length):
        raise ValueError(
            f"critic expects {critic_arch.in_channels} x {critic_arch.in_len}, "
            f"data is {channels} x {length}"
        )

    seeds = np.random.SeedSequence(config.seed).spawn(5)
    init_g_rng, init_c_rng, batch_rng, latent_rng, eps_rng = map(np.random.default_rng, seeds)

    gen = build_generator(gen_arch, init_g_rng, config.init_std)
    critic = build_critic(critic_arch, init_c_rng, config.init_std)
    critic_frozen = critic.frozen_view()
    g_params = gen.parameters()
    c_params = critic.parameters()
    g_state = AdamState.for_params(g_params, config.lr, config.beta1, config.beta2)
    c_state = AdamState.for_params(c_params, config.lr, config.beta1, config.beta2)
    stream = _BatchStream(n, config.batch_size, batch_rng)

    arch = _arch_manifest(gen_arch, critic_arch)
    cfg = asdict(config)
    groups = {"generator": gen, "critic": critic}
    history: dict[str, list] = {"critic_loss": [], "gen_loss": []}
    metrics: list[dict] = []
    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)

    def snapshot(iteration: int) -> Checkpoint:
        if out_path is not None:
            return save_checkpoint(out_path / "checkpoint.ckpt", groups, arch, cfg,
                                   iteration, history)
        return save_checkpoint_in_memory(groups, arch, cfg, iteration, history)

    for iteration in range(1, config.iterations + 1):
        c_losses, w_estimates, grad_norms = [], [], []
        for _ in range(config.n_critic):
            x_real = data[stream.next_indices()]
            z = sample_latent(latent_rng, config.batch_size, gen_arch.latent_dim,
                              config.latent_std)
            with ad.no_record():
                fake = generator_forward(gen, z, mode="train")
            with ad.record(higher_order=True):
                loss, parts = _critic_loss_parts(critic, x_real, fake.data,
                                                 config.lambda_gp, eps_rng)
                grads = ad.grad(loss, c_params)
            adam_step(c_params, grads, c_state)
            c_losses.append(float(loss.data))
            w_estimates.append(parts["wasserstein"])
            grad_norms.append(parts["grad_norm"])

        z = sample_latent(latent_rng, config.batch_size, gen_arch.latent_dim,
                          config.latent_std)
        with ad.record():
            g_loss = generator_loss(critic_frozen, gen, z)
            g_grads = ad.grad(g_loss, g_params)
        adam_step(g_params, g_grads, g_state)

        row = {
            "iteration": iteration,
            "critic_loss": float(np.mean(c_losses)),
            "gen_loss": float(g_loss.data),
            "wasserstein_estimate": float(np.mean(w_estimates)),
            "mean_grad_norm": float(np.mean(grad_norms)),
        }
        if not all(np.isfinite(v) for v in row.values()):
            if out_path is not None:
                write_metrics_csv(out_path / "metrics.csv", metrics)
            raise TrainingDiverged(
                f"non-finite loss at iteration {iteration}: critic {row['critic_loss']}, "
                f"generator {row['gen_loss']}; last checkpoint preserved"
            )
        metrics.append(row)
        history["critic_loss"].append(row["critic_loss"])
        history["gen_loss"].append(row["gen_loss"])
        for cb in callbacks:
            cb(row)
        if config.checkpoint_every and iteration % config.checkpoint_every == 0 \
                and iteration < config.iterations:
            snapshot(iteration)

    ckpt = snapshot(config.iterations)
    if out_path is not None:
        write_metrics_csv(out_path / "metrics.csv", metrics)
    return ckpt, metrics


def save_checkpoint_in_memory(groups, arch, cfg, iteration, history) -> Checkpoint:
    """Checkpoint object without touching disk (used when out_dir is unset)."""
    entries = []
    payload = []
    for group, mp in groups.items():
        for e in mp.entries():
            entries.append({**e, "name": f"{group}.{e['name']}"})
        payload.append(mp.pack())
    return Checkpoint(arch=arch, config=cfg, iteration=iteration,
                      history=history, entries=entries, payload=b"".join(payload))


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def load_generator(ckpt: Union[Checkpoint, str, Path]) -> tuple[ModelParams, dict]:
    """Rebuild the generator (eval-ready) from a checkpoint or its path."""
    if not isinstance(ckpt, Checkpoint):
        ckpt = read_checkpoint(ckpt)
    gen_arch = GeneratorArch(**ckpt.arch["generator"])
    gen = build_generator(gen_arch, np.random.default_rng(0))
    load_group(ckpt, "generator", gen)
    return gen, ckpt.config


def generate(ckpt: Union[Checkpoint, str, Path], n: int, seed: int = 0) -> np.ndarray:
    """Sample n signals: z ~ N(0, latent_std^2), generator in eval mode."""
    gen, cfg = load_generator(ckpt)
    arch: GeneratorArch = gen.meta["arch"]
    z = sample_latent(np.random.default_rng(seed), n, arch.latent_dim,
                      cfg.get("latent_std", 0.02))
    with ad.no_record():
        out = generator_forward(gen, z, mode="eval")
    return out.data


# ---------------------------------------------------------------------------
# estimator wrapper
# ---------------------------------------------------------------------------

class WGANSynthesizer(BaseEstimator):
    """Generative estimator: ``fit(X)`` trains the GAN, ``sample(n)`` draws.

    Constructor defaults are desk-sized; pass the full-size values
    (latent_dim=500, hidden_channels=150, n_stages=6, n_blocks=6,
    iterations=50000) for the full-size regimen.
    """

    def __init__(self, latent_dim=32, hidden_channels=16, n_stages=2, n_blocks=2,
                 base_len=None, iterations=2000, batch_size=32, n_critic=5,
                 lambda_gp=10.0, lr=1e-4, beta1=0.5, beta2=0.99, init_std=0.02,
                 latent_std=0.02, checkpoint_every=0, seed=0, out_dir=None):
        self.latent_dim = latent_dim
        self.hidden_channels = hidden_channels
        self.n_stages = n_stages
        self.n_blocks = n_blocks
        self.base_len = base_len
        self.iterations = iterations
        self.batch_size = batch_size
        self.n_critic = n_critic
        self.lambda_gp = lambda_gp
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.init_std = init_std
        self.latent_std = latent_std
        self.checkpoint_every = checkpoint_every
        self.seed = seed
        self.out_dir = out_dir

    def _config(self) -> TrainConfig:
        return TrainConfig(
            iterations=self.iterations, batch_size=self.batch_size, n_critic=self.n_critic,
            lambda_gp=self.lambda_gp, lr=self.lr, beta1=self.beta1, beta2=self.beta2,
            init_std=self.init_std, latent_std=self.latent_std, seed=self.seed,
            checkpoint_every=self.checkpoint_every,
        )

    def fit(self, X, y=None):
        X = check_signal_array(X)
        _, channels, length = X.shape
        base_len = self.base_len or solve_base_len(length, self.n_stages,
                                                   self.hidden_channels, self.latent_dim,
                                                   channels)
        gen_arch = GeneratorArch(self.latent_dim, self.hidden_channels, channels, length,
                                 base_len, self.n_stages)
        critic_arch = CriticArch(channels, length, self.hidden_channels, self.n_blocks)
        self.checkpoint_, self.metrics_ = train(X, self._config(), gen_arch, critic_arch,
                                                out_dir=self.out_dir)
        self.generator_, _ = load_generator(self.checkpoint_)
        return self

    def sample(self, n: int, seed: Optional[int] = None) -> np.ndarray:
        if not hasattr(self, "checkpoint_"):
            raise RuntimeError("WGANSynthesizer.sample called before fit")
        return generate(self.checkpoint_, n, self.seed if seed is None else seed)
