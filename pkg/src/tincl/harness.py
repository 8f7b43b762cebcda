"""Training pipelines, evaluation and embedding analysis."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from . import neuralnet as nn
from .config import RunConfig
from .errors import ConfigError
from .losses import ContrastiveBatch, contrastive_loss, mse_loss, total_loss
from .netsim import Dataset, full_reuse, generate_dataset, sum_rate
from .tinaug import make_pair
from .wmmse import WmmseSettings, binarize, label_dataset, wmmse_batch

log = logging.getLogger(__name__)

# independent random streams per purpose, all keyed by the run seed
STREAM_INIT, STREAM_PRETRAIN, STREAM_TRAIN, STREAM_NULL = 0, 1, 2, 3


def stream(seed: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1000 + purpose,)))


def init_model(cfg: RunConfig) -> nn.MlpModel:
    init_seed = int(stream(cfg.seed, STREAM_INIT).integers(2**63))
    return nn.init(cfg.mlp, init_seed)


def _batches(indices: np.ndarray, batch_size: int, min_size: int) -> List[np.ndarray]:
    out = [indices[k:k + batch_size] for k in range(0, len(indices), batch_size)]
    return [b for b in out if len(b) >= min_size]


def _contrastive_grads(model, channels, cfg: RunConfig, rng):
    view_a, view_b = make_pair(channels, cfg.network, rng, cfg.keep_prob)
    emb_a, cache_a = nn.forward_backbone(model, view_a)
    emb_b, cache_b = nn.forward_backbone(model, view_b)
    loss, d_a, d_b = contrastive_loss(ContrastiveBatch(emb_a, emb_b, cfg.temperature))
    grads = nn.backward_backbone(model, cache_a, d_a) + nn.backward_backbone(model, cache_b, d_b)
    return loss, grads


def pretrain(ds: Dataset, cfg: RunConfig, model: Optional[nn.MlpModel] = None):
    """Contrastive pre-training of the backbone on every sample.

    Returns ``(model, losses)`` with one mean loss per epoch.  The head is left
    untouched.
    """
    if len(ds) < 2:
        raise ConfigError("pre-training needs at least 2 samples")
    model = init_model(cfg) if model is None else model
    rng = stream(cfg.seed, STREAM_PRETRAIN)
    history = []
    for epoch in range(cfg.epochs_pretrain):
        epoch_loss = []
        for idx in _batches(rng.permutation(len(ds)), cfg.batch_size, 2):
            loss, grads = _contrastive_grads(model, ds.channels[idx], cfg, rng)
            model = nn.sgd_step(model, grads, cfg.lr_pretrain)
            epoch_loss.append(loss)
        history.append(float(np.mean(epoch_loss)))
        log.info("pretrain epoch %d loss %.5f", epoch, history[-1])
    return model, history


def _interleave(labeled: list, unlabeled: list) -> list:
    """Merge two batch lists so each is spread evenly over the epoch."""
    keyed = [((k + 0.5) / len(labeled), 0, ("L", b)) for k, b in enumerate(labeled)]
    keyed += [((k + 0.5) / len(unlabeled), 1, ("U", b)) for k, b in enumerate(unlabeled)]
    keyed.sort(key=lambda t: (t[0], t[1]))
    return [item for _, _, item in keyed]


def _train(model, ds: Dataset, cfg: RunConfig, lr: float, alpha: float, use_unlabeled: bool):
    if ds.m_labeled < 1:
        raise ConfigError("training needs at least one labeled sample")
    rng = stream(cfg.seed, STREAM_TRAIN)
    labeled_idx = np.arange(ds.m_labeled)
    unlabeled_idx = np.arange(ds.m_labeled, len(ds)) if use_unlabeled else np.arange(0)
    history = []
    for epoch in range(cfg.epochs_train):
        lab = _batches(rng.permutation(labeled_idx), cfg.batch_size, 1)
        unl = _batches(rng.permutation(unlabeled_idx), cfg.batch_size, 2) if alpha > 0 else []
        epoch_loss = []
        for kind, idx in _interleave(lab, unl):
            x = ds.channels[idx]
            if kind == "L":
                out, cache = nn.forward(model, x)
                sup_loss, d_out = mse_loss(out, ds.labels[idx])
                sup = (sup_loss, nn.backward(model, cache, d_out))
                if alpha > 0 and len(idx) >= 2:
                    loss, grads = total_loss(sup, _contrastive_grads(model, x, cfg, rng), alpha)
                else:
                    loss, grads = sup
            else:
                loss, grads = _contrastive_grads(model, x, cfg, rng)
            model = nn.sgd_step(model, grads, lr)
            epoch_loss.append(loss)
        history.append(float(np.mean(epoch_loss)))
        log.info("train epoch %d loss %.5f", epoch, history[-1])
    return model, history


def finetune(model: nn.MlpModel, ds: Dataset, cfg: RunConfig):
    """Joint training: labeled batches use MSE + alpha * contrastive, unlabeled batches contrastive only."""
    return _train(model, ds, cfg, cfg.lr_finetune, cfg.alpha_contrastive, use_unlabeled=True)


def train_supervised_only(ds: Dataset, cfg: RunConfig):
    return _train(init_model(cfg), ds, cfg, cfg.lr_supervised_only, 0.0, use_unlabeled=False)


@dataclass
class MetricsRow:
    run_id: str
    seed: Union[int, str]
    n: int
    m_labeled: int
    method: str
    normalized_sum_rate_mean: float
    normalized_sum_rate_std: float


Policy = Union[nn.MlpModel, Callable[[np.ndarray], np.ndarray]]


def as_policy(policy: Policy) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(policy, nn.MlpModel):
        return lambda channels: np.atleast_2d(nn.forward(policy, channels)[0])
    return policy


def full_reuse_policy(channels):
    return np.tile(full_reuse(channels.shape[-1]), (len(channels), 1))


def zeros_policy(channels):
    return np.zeros(channels.shape[:2])


def wmmse_policy(config, settings: WmmseSettings = WmmseSettings()):
    return lambda channels: wmmse_batch(channels, config, settings)


def make_test_dataset(cfg: RunConfig) -> Dataset:
    return generate_dataset(cfg.test_seed, cfg.eval_count, cfg.network)


def reference_sum_rates(test_ds: Dataset, settings: WmmseSettings = WmmseSettings()) -> np.ndarray:
    gamma = wmmse_batch(test_ds.channels, test_ds.config, settings)
    return sum_rate(test_ds.channels, gamma, test_ds.config)


def normalized_sum_rates(policy: Policy, test_ds: Dataset, reference: Optional[np.ndarray] = None):
    if reference is None:
        reference = reference_sum_rates(test_ds)
    gamma = as_policy(policy)(test_ds.channels)
    return sum_rate(test_ds.channels, gamma, test_ds.config) / reference


def evaluate(policy: Policy, test_ds: Dataset, cfg: RunConfig, method: str,
             reference: Optional[np.ndarray] = None, run_id: Optional[str] = None) -> MetricsRow:
    ratios = normalized_sum_rates(policy, test_ds, reference)
    return MetricsRow(
        run_id=run_id or f"n{cfg.n}-m{cfg.m_labeled}-s{cfg.seed}",
        seed=cfg.seed, n=cfg.n, m_labeled=cfg.m_labeled, method=method,
        normalized_sum_rate_mean=float(ratios.mean()),
        normalized_sum_rate_std=float(ratios.std()),
    )


def embeddings(model: nn.MlpModel, channels) -> np.ndarray:
    return np.atleast_2d(nn.forward_backbone(model, channels)[0])


def wmmse_label_bits(ds: Dataset, settings: WmmseSettings = WmmseSettings()) -> np.ndarray:
    """Binarised WMMSE decision per sample, reusing stored labels where present."""
    gamma = np.empty((len(ds), ds.config.n))
    m = ds.m_labeled
    if m:
        gamma[:m] = ds.labels
    if m < len(ds):
        gamma[m:] = wmmse_batch(ds.channels[m:], ds.config, settings)
    return binarize(gamma)


def export_embeddings(model: nn.MlpModel, ds: Dataset, label_bits=None) -> str:
    from .fileio import dumps_embeddings

    if label_bits is None:
        label_bits = wmmse_label_bits(ds)
    return dumps_embeddings(embeddings(model, ds.channels), label_bits)


def _label_ids(labels) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim > 1:
        labels = np.array(["".join(str(int(b)) for b in row) for row in labels])
    return np.unique(labels, return_inverse=True)[1].ravel()


def cluster_score(emb, labels) -> float:
    """Mean cosine similarity within label groups minus mean across groups.

    Uses group sums, so it is O(M) rather than O(M^2) in the number of points.
    """
    emb = np.atleast_2d(np.asarray(emb, dtype=np.float64))
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("cosine similarity undefined for zero embeddings")
    u = emb / norms
    ids = _label_ids(labels)
    groups = np.bincount(ids)
    if np.count_nonzero(groups) < 2:
        raise ValueError("cluster score needs at least two distinct labels")
    sums = np.zeros((groups.size, u.shape[1]))
    np.add.at(sums, ids, u)
    self_sims = (u * u).sum()
    within_total = (sums * sums).sum()
    total = u.sum(axis=0) @ u.sum(axis=0)
    within_pairs = (groups * (groups - 1)).sum()
    if within_pairs == 0:
        raise ValueError("cluster score needs a label shared by at least two points")
    across_pairs = len(u) ** 2 - (groups * groups).sum()
    within = (within_total - self_sims) / within_pairs
    across = (total - within_total) / across_pairs
    return float(within - across)


def cluster_null(emb, labels, rng: np.random.Generator, rounds: int = 30):
    """Mean and std of cluster_score under random label permutations."""
    labels = np.asarray(labels)
    scores = [cluster_score(emb, labels[rng.permutation(len(labels))]) for _ in range(rounds)]
    return float(np.mean(scores)), float(np.std(scores))


@dataclass
class SweepResult:
    rows: List[MetricsRow]
    models: dict


def _aggregate(rows: List[MetricsRow]) -> List[MetricsRow]:
    out = []
    keys = sorted({(r.n, r.m_labeled, r.method) for r in rows}, key=lambda k: (k[0], k[1], k[2]))
    for n, m, method in keys:
        group = [r for r in rows if (r.n, r.m_labeled, r.method) == (n, m, method)]
        means = np.array([r.normalized_sum_rate_mean for r in group])
        out.append(MetricsRow("aggregate", ";".join(str(r.seed) for r in group), n, m, method,
                              float(means.mean()), float(means.std())))
    return out


def run_seed(cfg: RunConfig, grid: Sequence[int], methods=("ssl", "sl_only", "full_reuse", "wmmse"),
             keep_models: bool = False) -> SweepResult:
    """All methods for one seed over a label budget grid, sharing data and pre-training."""
    grid = sorted(set(int(m) for m in grid))
    if grid and grid[-1] > cfg.m_total:
        raise ConfigError("label budget exceeds m_total")
    train = label_dataset(generate_dataset(cfg.seed, cfg.m_total, cfg.network), max(grid, default=0))
    test = make_test_dataset(cfg)
    reference = reference_sum_rates(test)
    pretrained = pretrain(train, cfg)[0] if "ssl" in methods else None
    rows, models = [], {}
    for m in grid:
        c = cfg.replace(m_labeled=m)
        ds = Dataset(train.config, train.channels, train.labels[:m] if m else None, train.seed)
        for method in methods:
            if method == "ssl":
                policy = finetune(pretrained, ds, c)[0]
            elif method == "sl_only":
                policy = train_supervised_only(ds, c)[0]
            elif method == "full_reuse":
                policy = full_reuse_policy
            elif method == "wmmse":
                policy = wmmse_policy(c.network)
            else:
                raise ConfigError(f"unknown method {method!r}")
            row = evaluate(policy, test, c, method, reference)
            log.info("%s %s mean %.4f", row.run_id, method, row.normalized_sum_rate_mean)
            rows.append(row)
            if keep_models and isinstance(policy, nn.MlpModel):
                models[(m, method)] = policy
    return SweepResult(rows, models)


def sweep(cfg: RunConfig, seeds: Sequence[int], grid: Sequence[int],
          methods=("ssl", "sl_only", "full_reuse", "wmmse")) -> List[MetricsRow]:
    rows = []
    for s in seeds:
        rows += run_seed(cfg.replace(seed=int(s)), grid, methods).rows
    return rows + _aggregate(rows)
