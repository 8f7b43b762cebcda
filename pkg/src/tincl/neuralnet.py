"""Fully-connected power-control network with a backbone/head split.

The backbone maps a flattened channel matrix through LeakyReLU hidden layers
and a final affine embedding layer (optionally followed by LeakyReLU, optionally
l2-normalised).  The head is a single affine layer with a sigmoid, giving power
fractions in [0, 1].  The head reads either the normalised embedding or the
raw one (``head_on_normalized``); the contrastive loss always sees the
normalised embedding when normalisation is on.

Everything is batched over rows and differentiated by hand in float64.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import ConfigError, NumericError


@dataclass(frozen=True)
class MlpSpec:
    n: int
    hidden_dims: Tuple[int, ...] = (128,)
    embedding_dim: int = 2
    leaky_slope: float = 0.01
    normalize_embedding: bool = True
    embedding_activation: bool = False
    head_on_normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(d) for d in self.hidden_dims))
        if self.n < 1 or self.embedding_dim < 1 or any(d < 1 for d in self.hidden_dims):
            raise ConfigError(f"all layer sizes must be >= 1: {self}")
        if not 0 < self.leaky_slope < 1:
            raise ConfigError("leaky_slope must lie in (0, 1)")

    @property
    def input_dim(self) -> int:
        return self.n * self.n

    @property
    def output_dim(self) -> int:
        return self.n

    def layer_dims(self) -> List[Tuple[int, int]]:
        """(fan_in, fan_out) for every affine layer, backbone first, head last."""
        dims = [self.input_dim, *self.hidden_dims, self.embedding_dim, self.output_dim]
        return list(zip(dims[:-1], dims[1:]))


@dataclass
class MlpModel:
    """Weights are stored (fan_out, fan_in); the last layer is the head."""

    spec: MlpSpec
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    @property
    def n_backbone(self) -> int:
        return len(self.weights) - 1

    def params(self) -> List[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self) -> "MlpModel":
        return MlpModel(self.spec, [w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass
class GradientSet:
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    @classmethod
    def zeros_like(cls, model: MlpModel) -> "GradientSet":
        return cls([np.zeros_like(w) for w in model.weights], [np.zeros_like(b) for b in model.biases])

    def params(self) -> List[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def __add__(self, other: "GradientSet") -> "GradientSet":
        return GradientSet([a + b for a, b in zip(self.weights, other.weights)],
                           [a + b for a, b in zip(self.biases, other.biases)])

    def scale(self, c: float) -> "GradientSet":
        return GradientSet([c * w for w in self.weights], [c * b for b in self.biases])


@dataclass
class Cache:
    model: MlpModel
    single: bool
    inputs: list = field(default_factory=list)  # input of every backbone layer
    pre: list = field(default_factory=list)  # pre-activations of hidden layers
    pre_embedding: np.ndarray = None
    raw: np.ndarray = None  # embedding before normalisation
    norm: np.ndarray = None
    embedding: np.ndarray = None
    output: np.ndarray = None


def init(spec: MlpSpec, seed: int) -> MlpModel:
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in spec.layer_dims():
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpModel(spec, weights, biases)


def _leaky(z, slope):
    return np.where(z > 0, z, slope * z)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _as_rows(h, spec: MlpSpec):
    x = np.asarray(h, dtype=np.float64)
    d = spec.input_dim
    if x.shape == (spec.n, spec.n) or x.shape == (d,):
        return x.reshape(1, d), True
    if x.shape[-2:] == (spec.n, spec.n) or (x.ndim == 2 and x.shape[1] == d):
        return x.reshape(-1, d), False
    raise ValueError(f"cannot interpret input of shape {x.shape} as {spec.n}x{spec.n} channels")


def forward_backbone(model: MlpModel, h):
    """Embedding of each channel matrix; returns (embedding, cache)."""
    spec = model.spec
    x, single = _as_rows(h, spec)
    cache = Cache(model=model, single=single)
    for k in range(model.n_backbone):
        cache.inputs.append(x)
        z = x @ model.weights[k].T + model.biases[k]
        if k < model.n_backbone - 1:
            cache.pre.append(z)
            x = _leaky(z, spec.leaky_slope)
        else:
            cache.pre_embedding = z
            x = _leaky(z, spec.leaky_slope) if spec.embedding_activation else z
    cache.raw = x
    if spec.normalize_embedding:
        norm = np.sqrt((x * x).sum(axis=1, keepdims=True))
        if np.any(norm == 0.0):
            raise NumericError("zero-norm embedding cannot be normalised")
        cache.norm = norm
        x = x / norm
    cache.embedding = x
    return (x[0] if single else x), cache


def forward_head(model: MlpModel, embedding, cache: Cache = None):
    e = np.asarray(embedding, dtype=np.float64)
    single = e.ndim == 1
    e = np.atleast_2d(e)
    if e.shape[1] != model.spec.embedding_dim:
        raise ValueError(f"embedding dimension {e.shape[1]} != {model.spec.embedding_dim}")
    out = _sigmoid(e @ model.weights[-1].T + model.biases[-1])
    if cache is not None:
        cache.output = out
    return out[0] if single else out


def head_input(model: MlpModel, cache: Cache):
    """The vector the head consumes for a cached backbone pass."""
    x = cache.embedding if model.spec.head_on_normalized else cache.raw
    return x[0] if cache.single else x


def forward(model: MlpModel, h):
    """Power fractions for each channel matrix; returns (power, cache)."""
    _, cache = forward_backbone(model, h)
    return forward_head(model, head_input(model, cache), cache), cache


def _rows(g, cache: Cache, width: int):
    g = np.asarray(g, dtype=np.float64)
    g = g.reshape(-1, width) if g.ndim == 1 else g
    if g.shape != (cache.inputs[0].shape[0], width):
        raise ValueError(f"gradient shape {g.shape} does not match cached batch")
    return g


def _check_cache(model: MlpModel, cache: Cache):
    if cache.model is not model:
        raise ValueError("cache was produced by a different model; rerun forward")


def backward_backbone(model: MlpModel, cache: Cache, d_embedding, d_raw=None) -> GradientSet:
    """Parameter gradients given dLoss/d(embedding); head gradients are zero.

    ``d_raw`` is an extra gradient on the embedding before normalisation.
    """
    _check_cache(model, cache)
    spec = model.spec
    grads = GradientSet.zeros_like(model)
    g = _rows(d_embedding, cache, spec.embedding_dim)
    if spec.normalize_embedding:
        e = cache.embedding
        # Jacobian of x/|x| is (I - e e^T)/|x|
        g = (g - e * (e * g).sum(axis=1, keepdims=True)) / cache.norm
    if d_raw is not None:
        g = g + _rows(d_raw, cache, spec.embedding_dim)
    if spec.embedding_activation:
        g = np.where(cache.pre_embedding > 0, g, spec.leaky_slope * g)
    for k in reversed(range(model.n_backbone)):
        if k < model.n_backbone - 1:
            g = np.where(cache.pre[k] > 0, g, spec.leaky_slope * g)
        grads.weights[k] = g.T @ cache.inputs[k]
        grads.biases[k] = g.sum(axis=0)
        if k > 0:
            g = g @ model.weights[k]
    return grads


def backward(model: MlpModel, cache: Cache, output_gradient, embedding_gradient=None) -> GradientSet:
    """Gradients of a scalar loss given dLoss/d(output).

    ``embedding_gradient`` adds a loss term that depends on the embedding directly.
    """
    _check_cache(model, cache)
    if cache.output is None:
        raise ValueError("cache has no head output; call forward, not forward_backbone")
    spec = model.spec
    g = _rows(output_gradient, cache, spec.output_dim)
    o = cache.output
    e = cache.embedding if spec.head_on_normalized else cache.raw
    dz = g * o * (1.0 - o)
    d_head = dz @ model.weights[-1]
    d_emb = np.zeros_like(d_head) if embedding_gradient is None else \
        _rows(embedding_gradient, cache, spec.embedding_dim)
    if spec.head_on_normalized:
        grads = backward_backbone(model, cache, d_emb + d_head)
    else:
        grads = backward_backbone(model, cache, d_emb, d_raw=d_head)
    grads.weights[-1] = dz.T @ e
    grads.biases[-1] = dz.sum(axis=0)
    return grads


def sgd_step(model: MlpModel, grads: GradientSet, lr: float) -> MlpModel:
    for g in grads.params():
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient")
    return MlpModel(
        model.spec,
        [w - lr * g for w, g in zip(model.weights, grads.weights)],
        [b - lr * g for b, g in zip(model.biases, grads.biases)],
    )
