"""EEG synthesis with a gradient-penalty Wasserstein GAN.

Library surface: a small autodiff engine (``eegwgan.autodiff``), EDF parsing
and preprocessing (``eegwgan.edf``), the synthesis models and training loop
(``eegwgan.wgan``), classifiers and the augmentation benchmark
(``eegwgan.classify``), spectral/Frechet/topographic evaluation
(``eegwgan.spectral``, ``eegwgan.fid``, ``eegwgan.topomap``), and the
``eegwgan`` command-line pipeline (``eegwgan.cli``).
"""

from .classify import BenchConfig, BenchReport, CNNClassifier, FNNClassifier, augmentation_bench
from .edf import Dataset, EdfHeader, Recording, load_dataset, parse_edf, preprocess, write_edf
from .fid import FidReport, fid
from .spectral import PsdEstimate, band_power, dataset_psd, fft, hann_window, welch_psd
from .topomap import TopomapGrid, topomap
from .wgan import (
    CriticArch,
    GeneratorArch,
    TrainConfig,
    WGANSynthesizer,
    build_critic,
    build_generator,
    critic_forward,
    critic_loss,
    generate,
    generator_forward,
    generator_loss,
    gradient_penalty,
    interpolate,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "BenchReport",
    "CNNClassifier",
    "CriticArch",
    "Dataset",
    "EdfHeader",
    "FNNClassifier",
    "FidReport",
    "GeneratorArch",
    "PsdEstimate",
    "Recording",
    "TopomapGrid",
    "TrainConfig",
    "WGANSynthesizer",
    "augmentation_bench",
    "band_power",
    "build_critic",
    "build_generator",
    "critic_forward",
    "critic_loss",
    "dataset_psd",
    "fft",
    "fid",
    "generate",
    "generator_forward",
    "generator_loss",
    "gradient_penalty",
    "hann_window",
    "interpolate",
    "load_dataset",
    "parse_edf",
    "preprocess",
    "topomap",
    "train",
    "welch_psd",
    "write_edf",
]
