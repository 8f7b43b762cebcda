"""Text file formats: datasets, model checkpoints, metrics and embedding CSVs.

Floats are always written with 17 significant digits so that reading and
rewriting a file reproduces it byte for byte.
"""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .netsim import Dataset, NetworkConfig
from .neuralnet import MlpModel, MlpSpec

DATASET_MAGIC = "TINCL v1"
CHECKPOINT_MAGIC = "TINCL-MLP v1"


def fmt(x) -> str:
    return "%.17g" % x


def fmt_row(values) -> str:
    return ",".join(fmt(v) for v in np.ravel(values))


def _parse_floats(text: str) -> np.ndarray:
    return np.array([float(t) for t in text.split(",")], dtype=np.float64)


def _parse_header(line: str, magic: str) -> dict:
    if not line.startswith(magic + " "):
        raise ConfigError(f"bad header, expected {magic!r}: {line[:60]!r}")
    fields = {}
    for tok in line[len(magic):].split():
        key, sep, value = tok.partition("=")
        if not sep:
            raise ConfigError(f"malformed header field {tok!r}")
        fields[key] = value
    return fields


def dumps_dataset(ds: Dataset) -> str:
    cfg = ds.config
    lines = [f"{DATASET_MAGIC} n={cfg.n} snr={fmt(cfg.snr)} count={len(ds)} "
             f"labeled={ds.m_labeled} seed={int(ds.seed)}"]
    for k, h in enumerate(ds.channels):
        line = fmt_row(h)
        if k < ds.m_labeled:
            line += " | " + fmt_row(ds.labels[k])
        lines.append(line)
    return "\n".join(lines) + "\n"


def loads_dataset(text: str) -> Dataset:
    lines = text.splitlines()
    if not lines:
        raise ConfigError("empty dataset file")
    head = _parse_header(lines[0], DATASET_MAGIC)
    try:
        n, count, labeled = int(head["n"]), int(head["count"]), int(head["labeled"])
        snr, seed = float(head["snr"]), int(head["seed"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"incomplete dataset header: {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != count:
        raise ConfigError(f"header says count={count} but file has {len(body)} samples")
    channels = np.empty((count, n, n))
    labels = np.empty((labeled, n))
    for k, line in enumerate(body):
        gains, sep, gamma = line.partition(" | ")
        channels[k] = _parse_floats(gains).reshape(n, n)
        if bool(sep) != (k < labeled):
            raise ConfigError(f"sample {k}: labels must cover exactly the first {labeled} samples")
        if sep:
            labels[k] = _parse_floats(gamma)
    return Dataset(NetworkConfig(n, snr), channels, labels if labeled else None, seed)


def write_dataset(ds: Dataset, path) -> None:
    Path(path).write_text(dumps_dataset(ds), encoding="utf-8")


def read_dataset(path) -> Dataset:
    return loads_dataset(Path(path).read_text(encoding="utf-8"))


def dumps_checkpoint(model: MlpModel) -> str:
    s = model.spec
    hidden = ",".join(str(d) for d in s.hidden_dims)
    lines = [f"{CHECKPOINT_MAGIC} n={s.n} hidden={hidden} embedding={s.embedding_dim} "
             f"slope={fmt(s.leaky_slope)} normalize={int(s.normalize_embedding)} "
             f"embedding_act={int(s.embedding_activation)} head_normalized={int(s.head_on_normalized)}"]
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        lines.append(f"weight {k} {w.shape[0]} {w.shape[1]}: {fmt_row(w)}")
        lines.append(f"bias {k} {b.shape[0]}: {fmt_row(b)}")
    return "\n".join(lines) + "\n"


_TENSOR = re.compile(r"^(weight|bias) (\d+) ([\d ]+): (.*)$")


def loads_checkpoint(text: str) -> MlpModel:
    lines = text.splitlines()
    head = _parse_header(lines[0], CHECKPOINT_MAGIC)
    spec = MlpSpec(
        n=int(head["n"]),
        hidden_dims=tuple(int(d) for d in head["hidden"].split(",") if d),
        embedding_dim=int(head["embedding"]),
        leaky_slope=float(head["slope"]),
        normalize_embedding=head["normalize"] == "1",
        embedding_activation=head["embedding_act"] == "1",
        head_on_normalized=head["head_normalized"] == "1",
    )
    weights, biases = [], []
    for line in lines[1:]:
        m = _TENSOR.match(line)
        if not m:
            raise ConfigError(f"malformed checkpoint line: {line[:60]!r}")
        kind, shape = m.group(1), tuple(int(d) for d in m.group(3).split())
        arr = _parse_floats(m.group(4)).reshape(shape)
        (weights if kind == "weight" else biases).append(arr)
    expected = spec.layer_dims()
    if [w.shape for w in weights] != [(o, i) for i, o in expected] or \
            [b.shape for b in biases] != [(o,) for _, o in expected]:
        raise ConfigError("checkpoint tensors do not match the declared architecture")
    return MlpModel(spec, weights, biases)


def write_checkpoint(model: MlpModel, path) -> None:
    Path(path).write_text(dumps_checkpoint(model), encoding="utf-8")


def read_checkpoint(path) -> MlpModel:
    return loads_checkpoint(Path(path).read_text(encoding="utf-8"))


METRICS_HEADER = "run_id,seed,n,m_labeled,method,normalized_sum_rate_mean,normalized_sum_rate_std"


def dumps_metrics(rows) -> str:
    out = [METRICS_HEADER]
    for r in rows:
        out.append(f"{r.run_id},{r.seed},{r.n},{r.m_labeled},{r.method},"
                   f"{fmt(r.normalized_sum_rate_mean)},{fmt(r.normalized_sum_rate_std)}")
    return "\n".join(out) + "\n"


def dumps_embeddings(embeddings, label_bits) -> str:
    embeddings = np.atleast_2d(embeddings)
    cols = ",".join(f"e{k + 1}" for k in range(embeddings.shape[1]))
    out = [f"sample_id,label_bits,{cols}"]
    for k, (e, bits) in enumerate(zip(embeddings, label_bits)):
        out.append(f"{k},{''.join(str(int(b)) for b in bits)},{fmt_row(e)}")
    return "\n".join(out) + "\n"


def loads_embeddings(text: str):
    """Inverse of dumps_embeddings: (embeddings, label bit strings)."""
    lines = text.splitlines()[1:]
    bits, emb = [], []
    for line in lines:
        _, b, rest = line.split(",", 2)
        bits.append(b)
        emb.append(_parse_floats(rest))
    return np.array(emb), bits
