import numpy as np
import pytest

from tincl import harness
from tincl import neuralnet as nn
from tincl.config import RunConfig
from tincl.errors import ConfigError
from tincl.fileio import loads_embeddings
from tincl.netsim import Dataset, generate_dataset
from tincl.wmmse import binarize, label_dataset

# frozen from a direct run: full reuse over the seed-0 test set (n=8, snr=1, 1000 samples)
FULL_REUSE_N8 = 0.5513553873892345


def tiny_cfg(**kw):
    base = dict(n=3, m_total=60, m_labeled=20, hidden_dims=(8,), embedding_dim=3, batch_size=16,
                epochs_pretrain=2, epochs_train=3, eval_count=50, seed=4)
    base.update(kw)
    return RunConfig(**base)


@pytest.fixture
def tiny():
    cfg = tiny_cfg()
    ds = label_dataset(generate_dataset(cfg.seed, cfg.m_total, cfg.network), cfg.m_labeled)
    return cfg, ds


def _same(a, b):
    return all(np.array_equal(x, y) for x, y in zip(a.params(), b.params()))


def test_pretrain_zero_epochs_is_init(tiny):
    cfg, ds = tiny
    model, history = harness.pretrain(ds, cfg.replace(epochs_pretrain=0))
    assert history == [] and _same(model, harness.init_model(cfg))


def test_pretrain_deterministic_and_head_frozen(tiny):
    cfg, ds = tiny
    a, hist = harness.pretrain(ds, cfg)
    b, _ = harness.pretrain(ds, cfg)
    init = harness.init_model(cfg)
    assert _same(a, b) and len(hist) == cfg.epochs_pretrain
    assert np.array_equal(a.weights[-1], init.weights[-1])
    assert not np.array_equal(a.weights[0], init.weights[0])


def test_pretrain_loss_decreases():
    cfg = tiny_cfg(m_total=512, batch_size=64, epochs_pretrain=8, hidden_dims=(32,), embedding_dim=4)
    ds = generate_dataset(cfg.seed, cfg.m_total, cfg.network)
    _, hist = harness.pretrain(ds, cfg)
    assert hist[-1] < hist[0]


def test_interleave_schedule():
    lab, unl = ["a", "b"], ["u1", "u2", "u3", "u4"]
    order = harness._interleave(lab, unl)
    assert [b for _, b in order] == ["u1", "a", "u2", "u3", "b", "u4"]
    assert harness._interleave(lab, []) == [("L", "a"), ("L", "b")]


def test_fully_labeled_has_no_unlabeled_batches(tiny, monkeypatch):
    cfg, ds = tiny
    full = label_dataset(ds, len(ds))
    kinds = []
    real = harness._interleave

    def spy(lab, unl):
        out = real(lab, unl)
        kinds.extend(k for k, _ in out)
        return out

    monkeypatch.setattr(harness, "_interleave", spy)
    harness.finetune(harness.init_model(cfg), full, cfg.replace(m_labeled=len(ds)))
    assert kinds and set(kinds) == {"L"}


def test_alpha_zero_full_labels_equals_supervised_only(tiny):
    cfg, ds = tiny
    full = label_dataset(ds, len(ds))
    c = cfg.replace(m_labeled=len(ds), alpha_contrastive=0.0, lr_finetune=0.02, lr_supervised_only=0.02)
    a, _ = harness.finetune(harness.init_model(c), full, c)
    b, _ = harness.train_supervised_only(full, c)
    assert _same(a, b)


def test_supervised_only_needs_labels(tiny):
    cfg, ds = tiny
    with pytest.raises(ConfigError):
        harness.train_supervised_only(Dataset(ds.config, ds.channels), cfg)


def test_supervised_only_deterministic_and_fixed_point(tiny):
    cfg, ds = tiny
    a, _ = harness.train_supervised_only(ds, cfg)
    b, _ = harness.train_supervised_only(ds, cfg)
    assert _same(a, b)
    init = harness.init_model(cfg)
    own = nn.forward(init, ds.channels[: cfg.m_labeled])[0]
    fixed = Dataset(ds.config, ds.channels, own, ds.seed)
    c, _ = harness.train_supervised_only(fixed, cfg)
    assert _same(c, init)


def test_finetune_updates_head(tiny):
    cfg, ds = tiny
    pre, _ = harness.pretrain(ds, cfg)
    post, hist = harness.finetune(pre, ds, cfg)
    assert len(hist) == cfg.epochs_train
    assert not np.array_equal(pre.weights[-1], post.weights[-1])


def test_evaluate_baselines():
    cfg = RunConfig(n=8, seed=0, eval_count=1000)
    test = harness.make_test_dataset(cfg)
    ref = harness.reference_sum_rates(test)
    row = harness.evaluate(harness.wmmse_policy(cfg.network), test, cfg, "wmmse", ref)
    assert row.normalized_sum_rate_mean == 1.0 and row.normalized_sum_rate_std == 0.0
    assert harness.evaluate(harness.zeros_policy, test, cfg, "zeros", ref).normalized_sum_rate_mean == 0.0
    fr = harness.evaluate(harness.full_reuse_policy, test, cfg, "full_reuse", ref)
    assert fr.normalized_sum_rate_mean == pytest.approx(FULL_REUSE_N8, rel=1e-12)


def test_train_test_separation(tiny):
    cfg, ds = tiny
    test = harness.make_test_dataset(cfg)
    assert test.seed != ds.seed
    train_rows = {h.tobytes() for h in ds.channels}
    assert not any(h.tobytes() in train_rows for h in test.channels)


def test_export_embeddings(tiny):
    cfg, ds = tiny
    model = harness.init_model(cfg)
    emb, bits = loads_embeddings(harness.export_embeddings(model, ds))
    assert len(emb) == len(ds)
    assert np.allclose(np.linalg.norm(emb, axis=1), 1.0)
    expected = binarize(ds.labels)
    assert bits[: ds.m_labeled] == ["".join(map(str, b)) for b in expected]


def test_cluster_score_anchors(rng):
    same = np.tile([1.0, 0.0], (10, 1))
    assert harness.cluster_score(same, [0] * 5 + [1] * 5) == pytest.approx(0.0, abs=1e-12)
    anti = np.vstack([np.tile([1.0, 0.0], (5, 1)), np.tile([-1.0, 0.0], (5, 1))])
    assert harness.cluster_score(anti, [0] * 5 + [1] * 5) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        harness.cluster_score(same, [0] * 10)


def test_cluster_score_matches_pairwise(rng):
    emb = rng.standard_normal((40, 3))
    labels = rng.integers(0, 3, 40)
    u = emb / np.linalg.norm(emb, axis=1, keepdims=True)
    sims = u @ u.T
    same = labels[:, None] == labels[None, :]
    off = ~np.eye(40, dtype=bool)
    expected = sims[same & off].mean() - sims[~same].mean()
    assert harness.cluster_score(emb, labels) == pytest.approx(expected, rel=1e-12)


def test_random_labels_score_near_zero(rng):
    # permutation-null simulation: independent labels give a score centred on 0
    emb = rng.standard_normal((2000, 2))
    mean, std = harness.cluster_null(emb, rng.integers(0, 4, 2000), rng, rounds=40)
    assert abs(mean) < 3 * std + 1e-3


def test_bit_labels_accepted():
    emb = np.array([[1.0, 0], [1.0, 0], [-1.0, 0], [-1.0, 0]])
    bits = np.array([[1, 0], [1, 0], [0, 1], [0, 1]])
    assert harness.cluster_score(emb, bits) == pytest.approx(2.0)


def test_sweep_rows():
    cfg = tiny_cfg(m_total=40, eval_count=30)
    rows = harness.sweep(cfg, [0, 1], [10, 20])
    per_seed = [r for r in rows if r.run_id != "aggregate"]
    agg = [r for r in rows if r.run_id == "aggregate"]
    assert len(per_seed) == 2 * 2 * 4 and len(agg) == 2 * 4
    for r in rows:
        if r.method == "wmmse":
            assert r.normalized_sum_rate_mean == 1.0
    ssl = [r.normalized_sum_rate_mean for r in per_seed if r.method == "ssl" and r.m_labeled == 10]
    agg_ssl = next(r for r in agg if r.method == "ssl" and r.m_labeled == 10)
    assert agg_ssl.normalized_sum_rate_mean == pytest.approx(np.mean(ssl))
    assert agg_ssl.seed == "0;1"
