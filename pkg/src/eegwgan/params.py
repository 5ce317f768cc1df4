"""Named parameter collections and the on-disk checkpoint container.

A checkpoint is a single file: an 8-byte magic, a length-prefixed canonical
JSON manifest (architecture + hash, config, iteration, loss history, entry
declarations), then every declared array as little-endian float64 in
declaration order. Saving, loading, and saving again is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .autodiff import BatchNormState, Tensor

MAGIC = b"EEGWGAN\x01"
FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    """Raised for malformed checkpoint files or architecture mismatches."""


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def arch_hash(arch: dict) -> str:
    return hashlib.sha256(canonical_json(arch).encode()).hexdigest()


class ModelParams:
    """Ordered collection of trainable tensors and batch-norm states."""

    def __init__(self, meta: Optional[dict] = None):
        self.meta = dict(meta or {})
        self._params: dict[str, Tensor] = {}
        self._bn: dict[str, BatchNormState] = {}
        self._order: list[tuple[str, str]] = []  # (kind, name)

    def add_param(self, name: str, array: np.ndarray) -> Tensor:
        if name in self._params or name in self._bn:
            raise ValueError(f"duplicate parameter name {name!r}")
        t = Tensor(np.asarray(array, dtype=np.float64))
        self._params[name] = t
        self._order.append(("param", name))
        return t

    def add_batch_norm(self, name: str, state: BatchNormState) -> BatchNormState:
        if name in self._params or name in self._bn:
            raise ValueError(f"duplicate parameter name {name!r}")
        self._bn[name] = state
        self._order.append(("bn", name))
        return state

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def bn_state(self, name: str) -> BatchNormState:
        return self._bn[name]

    def parameters(self) -> list[Tensor]:
        return [self._params[n] for k, n in self._order if k == "param"]

    def frozen_view(self) -> "ModelParams":
        """Same arrays, but every tensor is a constant (no gradients).

        Used when this model appears inside another model's loss, e.g. the
        critic while the generator is being updated. In-place optimizer
        updates remain visible because the numpy buffers are shared.
        """
        view = ModelParams(self.meta)
        for kind, name in self._order:
            if kind == "param":
                t = Tensor.__new__(Tensor)
                t.data = self._params[name].data
                t.node = None
                t.requires_grad = False
                view._params[name] = t
                view._order.append(("param", name))
            else:
                view._bn[name] = self._bn[name]
                view._order.append(("bn", name))
        return view

    def parameter_names(self) -> list[str]:
        return [n for k, n in self._order if k == "param"]

    def entries(self) -> list[dict]:
        """Declared arrays, in payload order."""
        out = []
        for kind, name in self._order:
            if kind == "param":
                out.append({"name": name, "shape": list(self._params[name].shape), "kind": "param"})
            else:
                state = self._bn[name]
                if not state.initialized():
                    raise CheckpointError(
                        f"batch-norm state {name!r} has no running statistics yet; "
                        "run at least one train-mode step before checkpointing"
                    )
                c = state.running_mean.shape[0]
                out.append({"name": name + ".running_mean", "shape": [c], "kind": "buffer"})
                out.append({"name": name + ".running_var", "shape": [c], "kind": "buffer"})
        return out

    def total_count(self) -> int:
        return sum(int(np.prod(e["shape"])) for e in self.entries())

    def pack(self) -> bytes:
        chunks = []
        for kind, name in self._order:
            if kind == "param":
                chunks.append(self._params[name].data.astype("<f8").tobytes())
            else:
                state = self._bn[name]
                chunks.append(state.running_mean.astype("<f8").tobytes())
                chunks.append(state.running_var.astype("<f8").tobytes())
        return b"".join(chunks)

    def unpack(self, payload: bytes) -> None:
        expected = self.total_count() * 8
        if len(payload) != expected:
            raise CheckpointError(f"payload is {len(payload)} bytes, expected {expected}")
        offset = 0

        def take(shape):
            nonlocal offset
            n = int(np.prod(shape))
            arr = np.frombuffer(payload, dtype="<f8", count=n, offset=offset).reshape(shape).copy()
            offset += n * 8
            return arr

        for kind, name in self._order:
            if kind == "param":
                self._params[name].data = take(self._params[name].shape)
            else:
                state = self._bn[name]
                c = len(state.running_mean) if state.initialized() else None
                if c is None:
                    raise CheckpointError(f"cannot unpack into uninitialized batch-norm state {name!r}")
                state.running_mean = take((c,))
                state.running_var = take((c,))


@dataclass
class Checkpoint:
    """Manifest plus flat parameter payload for one training artifact."""

    arch: dict
    config: dict
    iteration: int
    history: dict = field(default_factory=dict)
    entries: list = field(default_factory=list)
    payload: bytes = b""

    @property
    def architecture_hash(self) -> str:
        return arch_hash(self.arch)

    def manifest(self) -> dict:
        return {
            "format": FORMAT_VERSION,
            "arch": self.arch,
            "arch_hash": self.architecture_hash,
            "config": self.config,
            "iteration": self.iteration,
            "history": self.history,
            "entries": self.entries,
            "payload_bytes": len(self.payload),
        }


def save_checkpoint(path, params_groups: dict[str, ModelParams], arch: dict, config: dict,
                    iteration: int, history: Optional[dict] = None) -> Checkpoint:
    """Serialize named parameter groups (e.g. generator + critic) to one file."""
    entries = []
    payload_parts = []
    for group, mp in params_groups.items():
        for e in mp.entries():
            entries.append({**e, "name": f"{group}.{e['name']}"})
        payload_parts.append(mp.pack())
    ckpt = Checkpoint(arch=arch, config=config, iteration=iteration,
                      history=history or {}, entries=entries,
                      payload=b"".join(payload_parts))
    blob = canonical_json(ckpt.manifest()).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        f.write(ckpt.payload)
    return ckpt


def read_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
        length_field = f.read(8)
        if len(length_field) != 8:
            raise CheckpointError(f"{path}: truncated before the manifest length")
        (mlen,) = struct.unpack("<Q", length_field)
        if mlen > os.path.getsize(path):
            raise CheckpointError(f"{path}: declared manifest length {mlen} exceeds the file")
        raw_manifest = f.read(mlen)
        if len(raw_manifest) != mlen:
            raise CheckpointError(f"{path}: truncated manifest")
        try:
            manifest = json.loads(raw_manifest.decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise CheckpointError(f"{path}: unreadable manifest ({e})") from None
        payload = f.read()
    if manifest.get("format") != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint format {manifest.get('format')!r}")
    if len(payload) != manifest["payload_bytes"]:
        raise CheckpointError(
            f"{path}: truncated payload ({len(payload)} of {manifest['payload_bytes']} bytes)"
        )
    ckpt = Checkpoint(arch=manifest["arch"], config=manifest["config"],
                      iteration=manifest["iteration"], history=manifest["history"],
                      entries=manifest["entries"], payload=payload)
    if manifest["arch_hash"] != ckpt.architecture_hash:
        raise CheckpointError(
            f"{path}: architecture hash mismatch "
            f"(stored {manifest['arch_hash'][:12]}, computed {ckpt.architecture_hash[:12]})"
        )
    return ckpt


def load_group(ckpt: Checkpoint, group: str, mp: ModelParams) -> ModelParams:
    """Fill ``mp`` from the checkpoint's entries for one group prefix."""
    prefix = group + "."
    # Initialize batch-norm states so unpack has landing space.
    for e in ckpt.entries:
        if e["kind"] == "buffer" and e["name"].startswith(prefix) and e["name"].endswith(".running_mean"):
            bn_name = e["name"][len(prefix):-len(".running_mean")]
            state = mp.bn_state(bn_name)
            c = e["shape"][0]
            state.running_mean = np.zeros(c)
            state.running_var = np.ones(c)
    expected = [{**e, "name": e["name"][len(prefix):]} for e in ckpt.entries
                if e["name"].startswith(prefix)]
    declared = mp.entries()
    if [(e["name"], tuple(e["shape"])) for e in expected] != \
            [(e["name"], tuple(e["shape"])) for e in declared]:
        raise CheckpointError(
            f"checkpoint group {group!r} does not match this build's declared parameters"
        )
    payload = ckpt.payload
    pos = 0
    for e in ckpt.entries:
        n = int(np.prod(e["shape"])) * 8
        if e["name"].startswith(prefix):
            break
        pos += n
    group_bytes = sum(int(np.prod(e["shape"])) * 8 for e in expected)
    mp.unpack(payload[pos : pos + group_bytes])
    return mp
