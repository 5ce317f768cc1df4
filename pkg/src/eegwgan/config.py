"""Run configuration: flat dotted keys, presets, file + flag overrides.

Precedence: defaults < preset < config file < explicit overrides. The fully
resolved mapping is written next to every output artifact, and feeding that
snapshot back through ``--config`` reproduces the run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .classify import BenchConfig
from .wgan import CriticArch, GeneratorArch, TrainConfig, solve_base_len

# The desk preset shrinks sizes but keeps every structural rule (2L+2
# upsampling, floor pooling, 5 critic steps per generator step) intact.
DEFAULTS: dict = {
    "seed": 0,
    "data.fs": 160.0,
    "data.channels": 64,
    "data.target_len": 3152,
    "data.run_eyes_open": 1,
    "data.run_eyes_closed": 2,
    "arch.latent_dim": 500,
    "arch.hidden_channels": 150,
    "arch.n_stages": 6,
    "arch.n_blocks": 6,
    "arch.base_len": 54,
    "train.iterations": 50_000,
    "train.batch_size": 32,
    "train.n_critic": 5,
    "train.lambda_gp": 10.0,
    "train.lr": 1e-4,
    "train.beta1": 0.5,
    "train.beta2": 0.99,
    "train.init_std": 0.02,
    "train.latent_std": 0.02,
    "train.checkpoint_every": 0,
    "eval.nperseg": 256,
    "eval.overlap": 0.5,
    "bench.trials": 20,
    "bench.split": 0.8,
    "bench.epochs": 30,
    "bench.batch_size": 16,
    "bench.lr": 1e-3,
    "bench.ratio": 1.0,
}

PRESETS: dict[str, dict] = {
    "paper": {},  # the defaults are the full-size constants
    "desk": {
        "data.channels": 4,
        "data.target_len": 128,
        "arch.latent_dim": 32,
        "arch.hidden_channels": 16,
        "arch.n_stages": 2,
        "arch.n_blocks": 2,
        "arch.base_len": None,  # solved from target_len
        "train.iterations": 2000,
        "eval.nperseg": 128,
    },
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Resolved flat configuration plus typed views over it."""

    values: dict = field(default_factory=dict)
    preset: Optional[str] = None

    @classmethod
    def resolve(cls, preset: Optional[str] = None, config_file=None,
                overrides: Optional[dict] = None) -> "RunConfig":
        values = dict(DEFAULTS)
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
            values.update(PRESETS[preset])
        if config_file is not None:
            path = Path(config_file)
            if not path.exists():
                raise ConfigError(f"config file not found: {path}")
            try:
                loaded = json.loads(path.read_text())
            except json.JSONDecodeError as e:
                raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
            loaded.pop("preset", None)
            unknown = set(loaded) - set(DEFAULTS)
            if unknown:
                raise ConfigError(f"unknown config keys in {path}: {sorted(unknown)}")
            values.update(loaded)
        if overrides:
            unknown = set(overrides) - set(DEFAULTS)
            if unknown:
                raise ConfigError(f"unknown config keys: {sorted(unknown)}")
            values.update(overrides)
        return cls(values=values, preset=preset)

    def __getitem__(self, key: str):
        return self.values[key]

    def with_seed(self, seed: Optional[int]) -> "RunConfig":
        if seed is not None:
            self.values["seed"] = seed
        return self

    # typed views ----------------------------------------------------------

    def train_config(self) -> TrainConfig:
        v = self.values
        return TrainConfig(
            iterations=int(v["train.iterations"]),
            batch_size=int(v["train.batch_size"]),
            n_critic=int(v["train.n_critic"]),
            lambda_gp=float(v["train.lambda_gp"]),
            lr=float(v["train.lr"]),
            beta1=float(v["train.beta1"]),
            beta2=float(v["train.beta2"]),
            init_std=float(v["train.init_std"]),
            latent_std=float(v["train.latent_std"]),
            seed=int(v["seed"]),
            checkpoint_every=int(v["train.checkpoint_every"]),
        )

    def arch_pair(self, channels: Optional[int] = None,
                  length: Optional[int] = None) -> tuple[GeneratorArch, CriticArch]:
        v = self.values
        channels = int(v["data.channels"] if channels is None else channels)
        length = int(v["data.target_len"] if length is None else length)
        base_len = v["arch.base_len"]
        if base_len is None:
            base_len = solve_base_len(length, int(v["arch.n_stages"]),
                                      int(v["arch.hidden_channels"]),
                                      int(v["arch.latent_dim"]), channels)
        gen = GeneratorArch(
            latent_dim=int(v["arch.latent_dim"]),
            hidden_channels=int(v["arch.hidden_channels"]),
            out_channels=channels,
            out_len=length,
            base_len=int(base_len),
            n_stages=int(v["arch.n_stages"]),
        )
        critic = CriticArch(
            in_channels=channels,
            in_len=length,
            hidden_channels=int(v["arch.hidden_channels"]),
            n_blocks=int(v["arch.n_blocks"]),
        )
        return gen, critic

    def bench_config(self, ratio: Optional[float] = None,
                     trials: Optional[int] = None) -> BenchConfig:
        v = self.values
        return BenchConfig(
            trials=int(v["bench.trials"] if trials is None else trials),
            split=float(v["bench.split"]),
            epochs=int(v["bench.epochs"]),
            batch_size=int(v["bench.batch_size"]),
            lr=float(v["bench.lr"]),
            seed=int(v["seed"]),
            ratio=float(v["bench.ratio"] if ratio is None else ratio),
        )

    def condition_runs(self) -> dict:
        return {
            "eyes_open": int(self.values["data.run_eyes_open"]),
            "eyes_closed": int(self.values["data.run_eyes_closed"]),
        }

    # snapshotting ----------------------------------------------------------

    def snapshot(self) -> dict:
        out = dict(self.values)
        if self.preset is not None:
            out["preset"] = self.preset
        return out

    def write_snapshot(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.snapshot(), f, indent=2, sort_keys=True)
            f.write("\n")


def parse_override(text: str) -> tuple[str, object]:
    """Parse a ``--set key=value`` item; values are JSON with string fallback."""
    if "=" not in text:
        raise ConfigError(f"override must look like key=value, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value
