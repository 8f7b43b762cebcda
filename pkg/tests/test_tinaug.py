import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tincl.netsim import NetworkConfig, generate_dataset
from tincl.tinaug import augment, make_pair, tin_condition_holds, weak_link_mask

EXAMPLE = np.array([[3.0, 4.0, 1.0], [1.0, 4.0, 2.0], [1.0, 1.0, 3.0]])


def test_example_weak_set(net3):
    mask = weak_link_mask(EXAMPLE, net3)
    weak = {(i + 1, j + 1) for i, j in zip(*np.nonzero(mask))}
    assert weak == {(1, 3), (2, 1), (3, 1), (3, 2)}


def test_snr_scaling():
    # same snr-scaled matrix expressed with snr = 4
    cfg = NetworkConfig(3, 4.0)
    assert np.array_equal(weak_link_mask(EXAMPLE / 4.0, cfg), weak_link_mask(EXAMPLE, NetworkConfig(3, 1.0)))


def test_boundary_counts_as_weak():
    h = np.array([[4.0, 2.0], [2.0, 4.0]])  # 2 == sqrt(4)
    assert weak_link_mask(h, NetworkConfig(2)).tolist() == [[False, True], [True, False]]


def test_single_pair_and_strong_interference():
    assert not weak_link_mask([[2.0]], NetworkConfig(1)).any()
    h = np.full((3, 3), 100.0)
    np.fill_diagonal(h, 1.0)
    assert not weak_link_mask(h, NetworkConfig(3)).any()


def test_augment_extremes(net3, rng):
    mask = weak_link_mask(EXAMPLE, net3)
    assert np.array_equal(augment(EXAMPLE, mask, rng, 1.0), EXAMPLE)
    out = augment(EXAMPLE, mask, rng, 0.0)
    assert np.all(out[mask] == 0) and np.array_equal(out[~mask], EXAMPLE[~mask])


def test_augment_shape_mismatch(rng):
    with pytest.raises(ValueError):
        augment(np.ones((3, 3)), np.zeros((2, 2), bool), rng)


def test_make_pair(net3):
    a, b = make_pair(EXAMPLE, net3, np.random.default_rng(4))
    c, d = make_pair(EXAMPLE, net3, np.random.default_rng(4))
    assert np.array_equal(a, c) and np.array_equal(b, d)
    assert np.array_equal(np.diag(a), np.diag(EXAMPLE)) and np.array_equal(np.diag(b), np.diag(EXAMPLE))
    h = np.full((3, 3), 100.0)
    np.fill_diagonal(h, 1.0)
    a, b = make_pair(h, net3, np.random.default_rng(0))
    assert np.array_equal(a, h) and np.array_equal(b, h)


def test_stack_augmentation(net3):
    ds = generate_dataset(2, 50, net3)
    a, b = make_pair(ds.channels, net3, np.random.default_rng(0))
    mask = weak_link_mask(ds.channels, net3)
    for x in (a, b):
        assert np.array_equal(x[~mask], ds.channels[~mask])
        assert np.all((x[mask] == 0) | (x[mask] == ds.channels[mask]))


gains = arrays(np.float64, (4, 4), elements=st.floats(0, 20))


@settings(max_examples=200, deadline=None)
@given(gains, st.floats(0.1, 10), st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_augment_invariants(h, snr, seed, p):
    cfg = NetworkConfig(4, snr)
    mask = weak_link_mask(h, cfg)
    assert not np.diag(mask).any()
    assert np.array_equal(mask, weak_link_mask(h, cfg))
    out = augment(h, mask, np.random.default_rng(seed), p)
    assert np.array_equal(out[~mask], h[~mask])
    assert np.all((out[mask] == 0) | (out[mask] == h[mask]))


@settings(max_examples=200, deadline=None)
@given(gains, st.floats(0.1, 10))
def test_all_weak_implies_tin_optimality(h, snr):
    cfg = NetworkConfig(4, snr)
    off = ~np.eye(4, dtype=bool)
    if np.all(weak_link_mask(h, cfg)[off]):
        assert tin_condition_holds(h, cfg)


def test_tin_condition_example():
    # strong cross links violate the pairwise condition
    assert not tin_condition_holds(EXAMPLE, NetworkConfig(3))
    assert tin_condition_holds(np.eye(3) * 5, NetworkConfig(3))
