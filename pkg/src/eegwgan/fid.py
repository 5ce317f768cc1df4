"""Frechet distance between Gaussian fits of two feature distributions.

value = ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2*(S_a S_b)^{1/2}), with the matrix
square root taken through the symmetric product S_a^{1/2} S_b S_a^{1/2} and
negative eigenvalues clamped to zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass
class FidReport:
    """Frechet distance with its mean/trace split for diagnostics."""

    value: float
    feature_dim: int
    n_a: int
    n_b: int
    mean_term: float
    trace_term: float

    def to_json(self) -> dict:
        return {
            "fid": self.value,
            "feature_dim": self.feature_dim,
            "n_a": self.n_a,
            "n_b": self.n_b,
            "mean_term": self.mean_term,
            "trace_term": self.trace_term,
        }


def _psd_sqrt(sym: np.ndarray) -> np.ndarray:
    """Square root of a symmetric matrix, clamping negative eigenvalues."""
    vals, vecs = np.linalg.eigh((sym + sym.T) / 2.0)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid(features_a, features_b) -> FidReport:
    """Frechet distance between two [n, d] feature matrices."""
    a = np.asarray(features_a, dtype=np.float64)
    b = np.asarray(features_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"features must be 2-D [samples, dims], got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"feature dimensions disagree: {a.shape[1]} vs {b.shape[1]}")
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise ValueError("need at least 2 samples per side for a sample covariance")
    d = a.shape[1]
    if min(a.shape[0], b.shape[0]) < d:
        warnings.warn(
            f"fewer samples ({min(a.shape[0], b.shape[0])}) than feature dims ({d}); "
            "covariances are singular and the clamped square root is approximate",
            RuntimeWarning,
            stacklevel=2,
        )

    mu_a, mu_b = a.mean(axis=0), b.mean(axis=0)
    cov_a = np.cov(a, rowvar=False).reshape(d, d)
    cov_b = np.cov(b, rowvar=False).reshape(d, d)

    mean_term = float(np.sum((mu_a - mu_b) ** 2))
    root_a = _psd_sqrt(cov_a)
    inner = _psd_sqrt(root_a @ cov_b @ root_a)
    trace_term = float(np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(inner))
    value = mean_term + trace_term
    return FidReport(
        value=max(value, 0.0),
        feature_dim=d,
        n_a=a.shape[0],
        n_b=b.shape[0],
        mean_term=mean_term,
        trace_term=trace_term,
    )
