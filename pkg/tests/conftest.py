import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def sine_dataset(n=64, channels=2, length=128, fs=160.0, freq=10.0,
                 noise=0.05, seed=7) -> np.ndarray:
    """Fixed-frequency sines with random phases plus Gaussian noise."""
    r = np.random.default_rng(seed)
    t = np.arange(length) / fs
    phases = r.uniform(0, 2 * np.pi, (n, channels, 1))
    clean = 0.8 * np.sin(2 * np.pi * freq * t[None, None, :] + phases)
    return clean + noise * r.normal(size=(n, channels, length))


@pytest.fixture
def sine_data():
    return sine_dataset()
