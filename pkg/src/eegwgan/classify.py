"""CNN and FNN classifiers plus the real-vs-augmented benchmark.

Classifiers share the synthesis stack's initialization scheme (Gaussian
weights, zero biases) and optimizer. The benchmark trains two arms per trial
from identical seeds -- one on the real training split, one on the split plus
generated samples -- and always tests on held-out real recordings only.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from . import autodiff as ad
from ._validation import check_labels, check_rng, check_signal_array
from .autodiff import AdamState, Tensor, adam_step
from .params import ModelParams

CONDITION_LABELS = {"eyes_open": 0, "eyes_closed": 1}


@dataclass(frozen=True)
class ClassifierArch:
    """Layer plan for one classifier kind.

    cnn: conv blocks (kernel 3 + leaky ReLU + average pool), flatten, dense
    to ``feature_dim``, dense to 2. fnn: flatten, dense widths, dense to 2.
    The penultimate width ``feature_dim`` is what feature extraction exposes.
    """

    kind: str  # "cnn" | "fnn"
    in_channels: int
    in_len: int
    conv_channels: tuple = (16, 32)
    dense_widths: tuple = (128,)
    feature_dim: int = 64
    n_classes: int = 2

    def flat_dim(self) -> int:
        if self.kind == "fnn":
            return self.in_channels * self.in_len
        length = self.in_len
        for _ in self.conv_channels:
            length = (length - 2) // 2
        return self.conv_channels[-1] * length

    def validate(self) -> None:
        if self.kind not in ("cnn", "fnn"):
            raise ValueError(f"classifier kind must be 'cnn' or 'fnn', got {self.kind!r}")
        if self.kind == "cnn":
            length = self.in_len
            for i, _ in enumerate(self.conv_channels):
                if length < 4:
                    raise ValueError(f"input length {self.in_len} too short for conv block {i}")
                length = (length - 2) // 2
        if self.flat_dim() < 1 or self.feature_dim < 1:
            raise ValueError("degenerate classifier dimensions")


def build_classifier(arch: ClassifierArch, rng, init_std: float = 0.02) -> ModelParams:
    """Same init scheme as the synthesis nets: N(0, std^2) weights, zero biases."""
    arch.validate()
    rng = check_rng(rng)
    mp = ModelParams(meta={"kind": f"classifier_{arch.kind}", "arch": arch, "init_std": init_std})
    if arch.kind == "cnn":
        cin = arch.in_channels
        for i, cout in enumerate(arch.conv_channels):
            mp.add_param(f"conv{i}.w", rng.normal(0.0, init_std, (cout, cin, 3)))
            mp.add_param(f"conv{i}.b", np.zeros(cout))
            cin = cout
        widths = []
    else:
        widths = list(arch.dense_widths)
    prev = arch.flat_dim()
    for i, width in enumerate(widths):
        mp.add_param(f"dense{i}.w", rng.normal(0.0, init_std, (width, prev)))
        mp.add_param(f"dense{i}.b", np.zeros(width))
        prev = width
    mp.add_param("feature.w", rng.normal(0.0, init_std, (arch.feature_dim, prev)))
    mp.add_param("feature.b", np.zeros(arch.feature_dim))
    mp.add_param("logits.w", rng.normal(0.0, init_std, (arch.n_classes, arch.feature_dim)))
    mp.add_param("logits.b", np.zeros(arch.n_classes))
    return mp


def _forward(params: ModelParams, x: Tensor, return_features: bool = False) -> Tensor:
    arch: ClassifierArch = params.meta["arch"]
    batch = x.shape[0]
    if arch.kind == "cnn":
        h = x
        for i in range(len(arch.conv_channels)):
            h = ad.conv1d(h, params[f"conv{i}.w"], params[f"conv{i}.b"])
            h = ad.leaky_relu(h, 0.2)
            h = ad.avg_pool1d(h)
        flat = ad.reshape(h, (batch, arch.flat_dim()))
    else:
        flat = ad.reshape(x, (batch, arch.flat_dim()))
        for i in range(len(arch.dense_widths)):
            flat = ad.leaky_relu(ad.dense(flat, params[f"dense{i}.w"], params[f"dense{i}.b"]), 0.2)
    features = ad.leaky_relu(ad.dense(flat, params["feature.w"], params["feature.b"]), 0.2)
    if return_features:
        return features
    return ad.dense(features, params["logits.w"], params["logits.b"])


def logits(params: ModelParams, X) -> np.ndarray:
    X = check_signal_array(X)
    with ad.no_record():
        return _forward(params, Tensor(X, requires_grad=False)).data


def extract_features(params: ModelParams, X) -> np.ndarray:
    """Penultimate-layer activations, one row per signal."""
    if not params.meta.get("trained"):
        raise RuntimeError("classifier has not been trained; features would be noise")
    X = check_signal_array(X)
    with ad.no_record():
        return _forward(params, Tensor(X, requires_grad=False), return_features=True).data


def _cross_entropy(logit_t: Tensor, labels: np.ndarray) -> Tensor:
    """Mean softmax cross entropy, stabilized by a detached row max."""
    row_max = Tensor(logit_t.data.max(axis=1, keepdims=True), requires_grad=False)
    shifted = ad.sub(logit_t, row_max)
    lse = ad.add(row_max, ad.log(ad.reduce_sum(ad.exp(shifted), axes=(1,), keepdims=True)))
    onehot = np.zeros(logit_t.shape)
    onehot[np.arange(len(labels)), labels] = 1.0
    picked = ad.reduce_sum(ad.mul(logit_t, Tensor(onehot, requires_grad=False)),
                           axes=(1,), keepdims=True)
    return ad.mean(ad.sub(lse, picked))


def train_classifier(params: ModelParams, data, labels, epochs: int, rng,
                     batch_size: int = 16, lr: float = 1e-3) -> dict:
    """Adam on softmax cross entropy over shuffled minibatches.

    Returns a history dict with per-epoch mean loss and training accuracy.
    """
    data = check_signal_array(data)
    labels = check_labels(labels, data.shape[0])
    if len(np.unique(labels)) < 2:
        raise ValueError("training data contains a single class")
    rng = check_rng(rng)
    tensors = params.parameters()
    state = AdamState.for_params(tensors, lr=lr, beta1=0.9, beta2=0.999)
    n = data.shape[0]
    history = {"loss": [], "accuracy": []}
    for _ in range(epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            xb = Tensor(data[idx], requires_grad=False)
            with ad.record():
                loss = _cross_entropy(_forward(params, xb), labels[idx])
                grads = ad.grad(loss, tensors)
            adam_step(tensors, grads, state)
            losses.append(float(loss.data))
        history["loss"].append(float(np.mean(losses)))
        history["accuracy"].append(evaluate(params, data, labels))
    params.meta["trained"] = True
    return history


def evaluate(params: ModelParams, data, labels) -> float:
    """Fraction of argmax-correct predictions."""
    data = check_signal_array(data)
    labels = check_labels(labels, data.shape[0])
    pred = logits(params, data).argmax(axis=1)
    return float(np.mean(pred == labels))


# ---------------------------------------------------------------------------
# estimator wrappers
# ---------------------------------------------------------------------------

class _NeuralClassifier(ClassifierMixin, TransformerMixin, BaseEstimator):
    """sklearn-style front end over the functional classifier."""

    _kind = "cnn"

    def __init__(self, epochs=30, batch_size=16, lr=1e-3, init_std=0.02, seed=0):
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.init_std = init_std
        self.seed = seed

    def _arch(self, channels: int, length: int) -> ClassifierArch:
        return ClassifierArch(kind=self._kind, in_channels=channels, in_len=length)

    def fit(self, X, y):
        X = check_signal_array(X)
        y = check_labels(y, X.shape[0])
        rng = np.random.default_rng(np.random.SeedSequence(self.seed))
        self.arch_ = self._arch(X.shape[1], X.shape[2])
        self.params_ = build_classifier(self.arch_, rng, self.init_std)
        self.history_ = train_classifier(self.params_, X, y, self.epochs, rng,
                                         self.batch_size, self.lr)
        self.classes_ = np.array([0, 1])
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise RuntimeError(f"{type(self).__name__} has not been fitted")

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        return logits(self.params_, X)

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X).argmax(axis=1)

    def predict_proba(self, X) -> np.ndarray:
        z = self.decision_function(X)
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def transform(self, X) -> np.ndarray:
        """Penultimate-layer features (rows align with X)."""
        self._check_fitted()
        return extract_features(self.params_, X)


class CNNClassifier(_NeuralClassifier):
    """Two conv/pool blocks, then dense layers; features are 64-wide."""

    _kind = "cnn"


class FNNClassifier(_NeuralClassifier):
    """Flatten, dense 128, dense 64 (features), dense 2."""

    _kind = "fnn"


CLASSIFIER_KINDS = {"cnn": CNNClassifier, "fnn": FNNClassifier}


def save_classifier(path, params: ModelParams, history: Optional[dict] = None):
    """Persist a trained classifier with the shared checkpoint container."""
    from .params import save_checkpoint

    arch: ClassifierArch = params.meta["arch"]
    return save_checkpoint(path, {"classifier": params},
                           arch={"classifier": asdict(arch)},
                           config={"init_std": params.meta.get("init_std", 0.02),
                                   "trained": bool(params.meta.get("trained"))},
                           iteration=0, history=history or {})


def load_classifier(path) -> ModelParams:
    from .params import load_group, read_checkpoint

    ckpt = read_checkpoint(path)
    spec = dict(ckpt.arch["classifier"])
    spec["conv_channels"] = tuple(spec["conv_channels"])
    spec["dense_widths"] = tuple(spec["dense_widths"])
    arch = ClassifierArch(**spec)
    params = build_classifier(arch, np.random.default_rng(0))
    load_group(ckpt, "classifier", params)
    params.meta["trained"] = bool(ckpt.config.get("trained"))
    return params


# ---------------------------------------------------------------------------
# augmentation benchmark
# ---------------------------------------------------------------------------

@dataclass
class BenchConfig:
    trials: int = 20
    split: float = 0.8
    epochs: int = 30
    batch_size: int = 16
    lr: float = 1e-3
    seed: int = 0
    ratio: float = 1.0  # generated samples per real training sample, per class
    classifiers: tuple = ("cnn", "fnn")

    def validate(self) -> None:
        if not 0.0 < self.split < 1.0:
            raise ValueError(f"split must lie in (0, 1), got {self.split}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.ratio < 0:
            raise ValueError("ratio must be >= 0")


@dataclass
class BenchReport:
    """Per-classifier accuracy comparison, real-only vs real+generated."""

    config: dict
    rows: dict[str, dict] = field(default_factory=dict)

    def add(self, kind: str, real_acc: list, aug_acc: list) -> None:
        real = np.asarray(real_acc)
        aug = np.asarray(aug_acc)
        self.rows[kind] = {
            "real_accuracy": float(real.mean()),
            "augmented_accuracy": float(aug.mean()),
            "improvement": float(aug.mean() - real.mean()),
            "real_std": float(real.std(ddof=1)) if len(real) > 1 else 0.0,
            "augmented_std": float(aug.std(ddof=1)) if len(aug) > 1 else 0.0,
            "trials": int(len(real)),
        }

    def to_json(self) -> dict:
        return {"config": self.config, "classifiers": self.rows}

    def write_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json(), f, indent=2, sort_keys=True)
            f.write("\n")

    def write_csv(self, path) -> None:
        kinds = list(self.rows)
        fields = ["real_accuracy", "augmented_accuracy", "improvement",
                  "real_std", "augmented_std", "trials"]
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["metric"] + kinds)
            for metric in fields:
                w.writerow([metric] + [repr(self.rows[k][metric]) for k in kinds])


def _stratified_split(labels: np.ndarray, split: float, rng: np.random.Generator):
    train_idx, test_idx = [], []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if len(members) < 2:
            raise ValueError(f"class {cls} has {len(members)} samples; cannot stratify")
        perm = rng.permutation(members)
        cut = int(len(members) * split)
        cut = min(max(cut, 1), len(members) - 1)  # both sides non-empty
        train_idx.extend(perm[:cut])
        test_idx.extend(perm[cut:])
    return np.sort(np.asarray(train_idx)), np.sort(np.asarray(test_idx))


def augmentation_bench(X_real, y_real, generated_by_class: dict[int, np.ndarray],
                       cfg: BenchConfig) -> BenchReport:
    """Per trial: stratified split, identical-seed arms, test on real only.

    ``generated_by_class`` maps each class label to a pool of generated
    signals; each trial draws ratio * (real training count) samples per class
    from a trial-specific shuffle of the pool.
    """
    X_real = check_signal_array(X_real)
    y_real = check_labels(y_real, X_real.shape[0])
    cfg.validate()
    if cfg.ratio > 0:
        for cls in np.unique(y_real):
            if int(cls) not in generated_by_class:
                raise ValueError(f"no generated pool for class {int(cls)}")
            check_signal_array(generated_by_class[int(cls)],
                               n_channels=X_real.shape[1], length=X_real.shape[2],
                               name=f"generated_by_class[{int(cls)}]")

    report = BenchReport(config=asdict(cfg))
    trial_seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.trials)
    accs = {kind: {"real": [], "aug": []} for kind in cfg.classifiers}

    for trial, seed in enumerate(trial_seeds):
        split_ss, init_ss, train_ss, pool_ss = seed.spawn(4)
        train_idx, test_idx = _stratified_split(y_real, cfg.split,
                                                np.random.default_rng(split_ss))
        X_train, y_train = X_real[train_idx], y_real[train_idx]
        X_test, y_test = X_real[test_idx], y_real[test_idx]
        assert not np.intersect1d(train_idx, test_idx).size

        # Augmented arm data: real training split plus generated draws.
        if cfg.ratio > 0:
            pool_rng = np.random.default_rng(pool_ss)
            extra_x, extra_y = [], []
            for cls in np.unique(y_train):
                pool = generated_by_class[int(cls)]
                want = int(round(cfg.ratio * int(np.sum(y_train == cls))))
                if want == 0:
                    continue
                picks = pool_rng.permutation(len(pool))[:want]
                if want > len(pool):
                    picks = pool_rng.integers(0, len(pool), size=want)
                extra_x.append(pool[picks])
                extra_y.append(np.full(want, cls))
            X_aug = np.concatenate([X_train] + extra_x) if extra_x else X_train
            y_aug = np.concatenate([y_train] + extra_y) if extra_y else y_train
        else:
            X_aug, y_aug = X_train, y_train

        for kind in cfg.classifiers:
            arch = ClassifierArch(kind=kind, in_channels=X_real.shape[1],
                                  in_len=X_real.shape[2])
            for arm, (xa, ya) in (("real", (X_train, y_train)), ("aug", (X_aug, y_aug))):
                params = build_classifier(arch, np.random.default_rng(init_ss))
                train_classifier(params, xa, ya, cfg.epochs,
                                 np.random.default_rng(train_ss),
                                 cfg.batch_size, cfg.lr)
                accs[kind][arm].append(evaluate(params, X_test, y_test))

    for kind in cfg.classifiers:
        report.add(kind, accs[kind]["real"], accs[kind]["aug"])
    return report
