"""WMMSE labeling oracle, binary projection and exhaustive binary search."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError
from .netsim import Dataset, NetworkConfig, check_channel, sum_rate


@dataclass(frozen=True)
class WmmseSettings:
    max_iters: int = 500
    rel_tol: float = 1e-6
    floor: float = 1e-30

    def __post_init__(self):
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if not 0 < self.rel_tol < 1:
            raise ConfigError("rel_tol must lie in (0, 1)")
        if not self.floor > 0:
            raise ConfigError("floor must be positive")


def wmmse_batch(h, config: NetworkConfig, settings: WmmseSettings = WmmseSettings(),
                return_trace: bool = False):
    """Scalar WMMSE on a stack of channels ``h`` of shape (B, n, n).

    Works with amplitudes ``v`` in ``[0, sqrt(snr)]`` and unit noise power, so that
    ``v_i**2 * h_ij`` is the snr-scaled received power.  Each instance stops on its
    own once the relative sum-rate change drops below ``rel_tol``.

    Returns the power fractions (B, n) and, if requested, a list with one
    sum-rate trace per instance (initial point first).
    """
    h = check_channel(h, config)
    if h.ndim == 2:
        h = h[None]
    snr, fl = config.snr, settings.floor
    a = np.sqrt(h)
    a2 = h
    a_diag = np.diagonal(a, axis1=1, axis2=2).copy()
    vmax = np.sqrt(snr)
    B, n = h.shape[0], config.n

    v = np.full((B, n), vmax)
    rate = sum_rate(h, v * v / snr, config)
    traces = [[r] for r in rate]
    active = np.ones(B, dtype=bool)

    for _ in range(settings.max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        av, aa, aa2, vv = a_diag[idx], a[idx], a2[idx], v[idx]
        # receiver and weight updates
        u = av * vv / np.maximum((aa2 * (vv * vv)[:, None, :]).sum(axis=2) + 1.0, fl)
        w = 1.0 / np.maximum(1.0 - u * av * vv, fl)
        # transmitter update: denominator sums over receivers j of w_j u_j^2 a_ji^2
        den = (aa2 * (w * u * u)[:, :, None]).sum(axis=1)
        vv = np.clip(w * u * av / np.maximum(den, fl), 0.0, vmax)
        if not np.all(np.isfinite(vv)):
            raise NumericError("non-finite WMMSE iterate")
        v[idx] = vv
        new_rate = sum_rate(aa2, vv * vv / snr, config)
        for k, r in zip(idx, new_rate):
            traces[k].append(r)
        change = np.abs(new_rate - rate[idx]) / np.maximum(np.abs(rate[idx]), fl)
        rate[idx] = new_rate
        active[idx[change < settings.rel_tol]] = False

    gamma = np.clip(v * v / snr, 0.0, 1.0)
    if return_trace:
        return gamma, [np.array(t) for t in traces]
    return gamma


def wmmse(h, config: NetworkConfig, settings: WmmseSettings = WmmseSettings()) -> np.ndarray:
    h = check_channel(h, config)
    if h.ndim != 2:
        raise ValueError("wmmse expects a single n x n channel; use wmmse_batch for stacks")
    return wmmse_batch(h[None], config, settings)[0]


def binarize(gamma) -> np.ndarray:
    """Nearest binary vector in l2; ties at exactly 0.5 go to 1."""
    return (np.asarray(gamma, dtype=np.float64) >= 0.5).astype(np.int64)


def binary_candidates(n: int) -> np.ndarray:
    """All 2**n binary vectors ordered by their value as an n-bit integer (first entry = MSB)."""
    return np.array(list(itertools.product((0.0, 1.0), repeat=n)))


def exhaustive_binary_oracle(h, config: NetworkConfig, max_n: int = 20):
    if config.n > max_n:
        raise ConfigError(f"exhaustive search limited to n <= {max_n}, got n={config.n}")
    h = check_channel(h, config)
    cands = binary_candidates(config.n)
    values = sum_rate(h[None], cands, config)
    # argmax returns the first maximum, i.e. the smallest integer value
    best = int(np.argmax(values))
    return cands[best].astype(np.int64), float(values[best])


def label_dataset(ds: Dataset, m_labeled: int, settings: WmmseSettings = WmmseSettings()) -> Dataset:
    if not 0 <= m_labeled <= len(ds):
        raise ConfigError(f"m_labeled must lie in [0, {len(ds)}], got {m_labeled}")
    labels = None
    if m_labeled > 0:
        labels = wmmse_batch(ds.channels[:m_labeled], ds.config, settings)
    return Dataset(config=ds.config, channels=ds.channels.copy(), labels=labels, seed=ds.seed)
