"""Weak-interference detection and random channel augmentations.

A cross link ``(i, j)`` is weak when its snr-scaled gain is at most the square
root of the weaker of the two snr-scaled direct gains it connects:

    snr * H[i, j] <= sqrt(snr * min(H[i, i], H[j, j]))

Such links can be treated as noise, so dropping a random subset of them gives a
channel that should map to a similar power allocation.
"""
from __future__ import annotations

import numpy as np

from .netsim import NetworkConfig, check_channel


def weak_link_mask(h, config: NetworkConfig) -> np.ndarray:
    """Boolean mask of weak links; works on a single matrix or a stack (..., n, n)."""
    h = check_channel(h, config)
    snr = config.snr
    d = np.diagonal(h, axis1=-2, axis2=-1)
    weaker = np.minimum(d[..., :, None], d[..., None, :])
    mask = snr * h <= np.sqrt(snr * weaker)
    mask &= ~np.eye(config.n, dtype=bool)
    return mask


def tin_condition_holds(h, config: NetworkConfig) -> bool:
    """Pairwise TIN optimality test: snr*H_ii >= snr*H_ij * snr*H_ki for all j, k != i."""
    h = check_channel(h, config)
    g = config.snr * h
    n = config.n
    off = ~np.eye(n, dtype=bool)
    for i in range(n):
        out_i = g[i][off[i]]  # interference caused at Rx_i
        in_i = g[:, i][off[:, i]]  # interference caused by Tx_i
        if out_i.size and g[i, i] < out_i.max() * in_i.max():
            return False
    return True


def augment(h, mask, rng: np.random.Generator, keep_prob: float = 0.5) -> np.ndarray:
    """Zero each masked entry independently with probability ``1 - keep_prob``."""
    h = np.asarray(h, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if h.shape != mask.shape:
        raise ValueError(f"mask shape {mask.shape} does not match channel shape {h.shape}")
    if not 0.0 <= keep_prob <= 1.0:
        raise ValueError("keep_prob must lie in [0, 1]")
    drop = mask & (rng.random(h.shape) >= keep_prob)
    return np.where(drop, 0.0, h)


def make_pair(h, config: NetworkConfig, rng: np.random.Generator, keep_prob: float = 0.5):
    """Two independent augmentations of ``h`` (or of each matrix in a stack) sharing one mask."""
    mask = weak_link_mask(h, config)
    return augment(h, mask, rng, keep_prob), augment(h, mask, rng, keep_prob)
