"""Input validation helpers shared by the estimator-style classes."""

from __future__ import annotations

import numpy as np


def check_signal_array(X, n_channels=None, length=None, name="X") -> np.ndarray:
    """Validate a [n_samples, channels, length] float signal array."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3:
        raise ValueError(f"{name} must be 3-D [samples, channels, length], got shape {X.shape}")
    if X.shape[0] == 0:
        raise ValueError(f"{name} contains no samples")
    if n_channels is not None and X.shape[1] != n_channels:
        raise ValueError(f"{name} has {X.shape[1]} channels, expected {n_channels}")
    if length is not None and X.shape[2] != length:
        raise ValueError(f"{name} has length {X.shape[2]}, expected {length}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_labels(y, n_samples, name="y") -> np.ndarray:
    """Validate binary class labels aligned with the sample axis."""
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != n_samples:
        raise ValueError(f"{name} must be 1-D with {n_samples} entries, got shape {y.shape}")
    y = y.astype(np.int64)
    bad = set(np.unique(y)) - {0, 1}
    if bad:
        raise ValueError(f"{name} must contain only labels 0 and 1, found {sorted(bad)}")
    return y


def check_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)
