"""Contrastive and supervised losses with analytic gradients."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError


@dataclass
class ContrastiveBatch:
    anchors: np.ndarray  # (B, l), views H-bar
    positives: np.ndarray  # (B, l), views H-underbar
    temperature: float = 0.1

    def __post_init__(self):
        self.anchors = np.atleast_2d(np.asarray(self.anchors, dtype=np.float64))
        self.positives = np.atleast_2d(np.asarray(self.positives, dtype=np.float64))
        if self.anchors.shape != self.positives.shape:
            raise ValueError(f"anchor/positive shapes differ: {self.anchors.shape} vs {self.positives.shape}")
        if not self.temperature > 0:
            raise ConfigError("temperature must be positive")


def contrastive_loss(batch: ContrastiveBatch):
    """InfoNCE over a batch of view pairs.

    Row ``i`` scores anchor ``i`` against every positive; the matching positive
    is the target and the positives of the other rows are the negatives.

    Returns ``(loss, d_anchors, d_positives)``.
    """
    a, p, tau = batch.anchors, batch.positives, batch.temperature
    B = a.shape[0]
    if B < 2:
        raise ValueError("contrastive loss needs a batch of at least 2 pairs")
    logits = a @ p.T / tau
    shifted = logits - logits.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    denom = expd.sum(axis=1, keepdims=True)
    log_prob_pos = np.diagonal(shifted) - np.log(denom[:, 0])
    loss = -log_prob_pos.mean()
    if not np.isfinite(loss):
        raise NumericError("non-finite contrastive loss")
    d_logits = expd / denom
    d_logits[np.diag_indices(B)] -= 1.0
    d_logits /= B * tau
    return float(loss), d_logits @ p, d_logits.T @ a


def mse_loss(preds, targets):
    """Batch mean of squared l2 errors; returns ``(loss, d_preds)``."""
    preds = np.atleast_2d(np.asarray(preds, dtype=np.float64))
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if preds.shape != targets.shape:
        raise ValueError(f"prediction shape {preds.shape} does not match target shape {targets.shape}")
    diff = preds - targets
    B = preds.shape[0]
    loss = float((diff * diff).sum() / B)
    if not np.isfinite(loss):
        raise NumericError("non-finite supervised loss")
    return loss, 2.0 * diff / B


def total_loss(supervised, contrastive, alpha: float):
    """Combine ``(loss, grads)`` pairs as supervised + alpha * contrastive.

    ``grads`` may be arrays or GradientSets, as long as both sides agree.
    """
    if alpha < 0:
        raise ConfigError("alpha must be nonnegative")
    ls, gs = supervised
    lc, gc = contrastive
    if hasattr(gs, "scale"):
        grads = gs + gc.scale(alpha)
    else:
        grads = np.asarray(gs) + alpha * np.asarray(gc)
    return ls + alpha * lc, grads
