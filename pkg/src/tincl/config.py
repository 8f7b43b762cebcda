"""Run configuration and its ``key = value`` file format."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

from .errors import ConfigError
from .netsim import NetworkConfig
from .neuralnet import MlpSpec

# test seed = training seed XOR this constant
TEST_SEED_XOR = 0x5EED_7E57_0000_0001


@dataclass(frozen=True)
class RunConfig:
    # network
    n: int = 8
    snr: float = 1.0
    # data
    m_total: int = 1000
    m_labeled: int = 50
    # model
    hidden_dims: Tuple[int, ...] = (512,)
    embedding_dim: int = 512
    leaky_slope: float = 0.01
    normalize_embedding: bool = True
    embedding_activation: bool = False
    head_on_normalized: bool = False
    # optimisation
    batch_size: int = 64
    lr_pretrain: float = 0.05
    lr_finetune: float = 0.05
    lr_supervised_only: float = 0.01
    temperature: float = 0.1
    alpha_contrastive: float = 1.0
    epochs_pretrain: int = 20
    epochs_train: int = 100
    keep_prob: float = 0.5
    seed: int = 0
    eval_count: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(d) for d in self.hidden_dims))
        if not 0 <= self.m_labeled <= self.m_total:
            raise ConfigError(f"need 0 <= m_labeled <= m_total, got {self.m_labeled}, {self.m_total}")
        if self.m_total < 1 or self.eval_count < 1:
            raise ConfigError("m_total and eval_count must be positive")
        if self.batch_size < 2:
            raise ConfigError("batch_size must be >= 2")
        for name in ("lr_pretrain", "lr_finetune", "lr_supervised_only", "temperature"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.epochs_pretrain < 0 or self.epochs_train < 0:
            raise ConfigError("epoch counts must be nonnegative")
        if self.alpha_contrastive < 0:
            raise ConfigError("alpha_contrastive must be nonnegative")
        if not 0 <= self.keep_prob <= 1:
            raise ConfigError("keep_prob must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        # validate nested specs eagerly
        self.network, self.mlp  # noqa: B018

    @property
    def network(self) -> NetworkConfig:
        return NetworkConfig(self.n, self.snr)

    @property
    def mlp(self) -> MlpSpec:
        return MlpSpec(self.n, self.hidden_dims, self.embedding_dim, self.leaky_slope,
                       self.normalize_embedding, self.embedding_activation, self.head_on_normalized)

    @property
    def test_seed(self) -> int:
        return self.seed ^ TEST_SEED_XOR

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def cluster_demo(cls, seed: int = 0) -> "RunConfig":
        """Small network used to inspect embedding clusters."""
        return cls(n=3, m_total=10_000, m_labeled=0, hidden_dims=(128,), embedding_dim=2,
                   epochs_pretrain=20, seed=seed)

    @classmethod
    def sum_rate_study(cls, n: int = 8, m_labeled: int = 50, seed: int = 0) -> "RunConfig":
        return cls(n=n, m_total=1000, m_labeled=m_labeled, seed=seed)


FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def parse_value(name: str, text: str):
    if name not in FIELDS:
        raise ConfigError(f"unknown config key {name!r}")
    default = FIELDS[name].default
    text = text.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(text)
            return low in ("1", "true", "yes")
        if isinstance(default, tuple):
            return tuple(int(t) for t in text.replace(" ", "").split(",") if t)
        if isinstance(default, int):
            return int(text, 0)
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {text!r}") from exc


def read_config_file(path) -> dict:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key = key.strip()
        values[key] = parse_value(key, value)
    return values


def dumps_config(cfg: RunConfig) -> str:
    lines = []
    for name in FIELDS:
        v = getattr(cfg, name)
        if isinstance(v, bool):
            v = int(v)
        elif isinstance(v, tuple):
            v = ",".join(str(d) for d in v)
        elif isinstance(v, float):
            v = "%.17g" % v
        lines.append(f"{name} = {v}")
    return "\n".join(lines) + "\n"
