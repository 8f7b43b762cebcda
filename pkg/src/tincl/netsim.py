"""Channel generation and rate evaluation for the N-pair interference network.

Gains are stored as squared magnitudes ``H[i, j] = |h_ij|^2`` where row ``i``
is the receiver and column ``j`` the transmitter.  Only the ratio
``snr = P_max / sigma^2`` enters any formula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class NetworkConfig:
    n: int
    snr: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if not (math.isfinite(self.snr) and self.snr > 0):
            raise ConfigError(f"snr must be positive and finite, got {self.snr!r}")


@dataclass
class Dataset:
    """Channel samples; labels (WMMSE power vectors) cover a prefix of the samples."""

    config: NetworkConfig
    channels: np.ndarray  # (M, n, n)
    labels: Optional[np.ndarray] = None  # (M_L, n)
    seed: int = 0

    def __post_init__(self):
        self.channels = np.asarray(self.channels, dtype=np.float64)
        n = self.config.n
        if self.channels.ndim != 3 or self.channels.shape[1:] != (n, n):
            raise ValueError(f"channels must have shape (M, {n}, {n}), got {self.channels.shape}")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.float64).reshape(-1, n)
            if len(self.labels) > len(self.channels):
                raise ValueError("more labels than channel samples")
            if len(self.labels) == 0:
                self.labels = None

    def __len__(self):
        return len(self.channels)

    @property
    def m_labeled(self) -> int:
        return 0 if self.labels is None else len(self.labels)


def check_channel(h, config: NetworkConfig) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    n = config.n
    if h.shape[-2:] != (n, n):
        raise ValueError(f"channel matrix must be {n}x{n}, got shape {h.shape}")
    if not np.all(np.isfinite(h)) or np.any(h < 0):
        raise ValueError("channel gains must be finite and nonnegative")
    return h


def sample_substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for sample ``index`` of the dataset keyed by ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_channel(rng: np.random.Generator, config: NetworkConfig) -> np.ndarray:
    # |h|^2 with h ~ CN(0, 1): sum of two squared N(0, 1/2) components.
    n = config.n
    re, im = rng.standard_normal((2, n, n)) * math.sqrt(0.5)
    return re * re + im * im


def _power(gamma, n) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=np.float64)
    if gamma.shape[-1] != n:
        raise ValueError(f"power vector length {gamma.shape[-1]} does not match n={n}")
    return gamma


def rates(h, gamma, config: NetworkConfig) -> np.ndarray:
    """Per-link Shannon rates in bits per channel use.

    Broadcasts over leading batch dimensions: ``h`` (..., n, n), ``gamma`` (..., n).
    """
    h = np.asarray(h, dtype=np.float64)
    n = config.n
    if h.shape[-2:] != (n, n):
        raise ValueError(f"channel matrix must be {n}x{n}, got shape {h.shape}")
    gamma = _power(gamma, n)
    received = h * gamma[..., None, :]
    signal = np.diagonal(received, axis1=-2, axis2=-1)
    interference = (received * (1.0 - np.eye(n))).sum(axis=-1)
    return np.log2(1.0 + signal / (interference + 1.0 / config.snr))


def sum_rate(h, gamma, config: NetworkConfig):
    return rates(h, gamma, config).sum(axis=-1)


def full_reuse(n: int) -> np.ndarray:
    if n < 1:
        raise ConfigError("n must be >= 1")
    return np.ones(n)


def generate_dataset(seed: int, count: int, config: NetworkConfig) -> Dataset:
    if count < 1:
        raise ConfigError("dataset count must be >= 1")
    channels = np.stack([sample_channel(sample_substream(seed, k), config) for k in range(count)])
    return Dataset(config=config, channels=channels, seed=seed)
