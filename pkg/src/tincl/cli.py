"""Command-line entry point: ``tincl <subcommand> [options]``.

Every RunConfig field is also a flag (``--m-labeled 50``); ``--config FILE``
loads ``key = value`` lines first and flags override them.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .config import FIELDS, RunConfig, parse_value, read_config_file
from .errors import ConfigError, NumericError
from .fileio import (dumps_metrics, read_checkpoint, read_dataset, write_checkpoint,
                     write_dataset)
from .netsim import generate_dataset
from .wmmse import label_dataset

POLICIES = {"full_reuse", "wmmse", "zeros"}


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value file with RunConfig fields")
    for name in FIELDS:
        p.add_argument("--" + name.replace("_", "-"), dest=name, default=None, metavar="V")
    p.add_argument("-v", "--verbose", action="store_true")


def resolve_config(args) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for name in FIELDS:
        raw = getattr(args, name, None)
        if raw is not None:
            values[name] = parse_value(name, raw)
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_gen(args, cfg):
    if args.test:
        ds = harness.make_test_dataset(cfg)
    else:
        ds = generate_dataset(cfg.seed, cfg.m_total, cfg.network)
    write_dataset(ds, args.out)


def cmd_label(args, cfg):
    ds = read_dataset(args.data)
    m = cfg.m_labeled if args.count is None else args.count
    write_dataset(label_dataset(ds, m), args.out or args.data)


def _check_dataset(ds, cfg):
    if ds.config != cfg.network:
        raise ConfigError(f"dataset network {ds.config} does not match config {cfg.network}")


def cmd_pretrain(args, cfg):
    ds = read_dataset(args.data)
    _check_dataset(ds, cfg)
    model, history = harness.pretrain(ds, cfg)
    write_checkpoint(model, args.out)
    if args.loss_log:
        _write(args.loss_log, "epoch,loss\n" + "".join(f"{k},{v!r}\n" for k, v in enumerate(history)))


def cmd_train(args, cfg):
    ds = read_dataset(args.data)
    _check_dataset(ds, cfg)
    if ds.m_labeled < cfg.m_labeled:
        raise ConfigError(f"dataset has {ds.m_labeled} labels, config asks for {cfg.m_labeled}")
    if args.method == "sl_only":
        model, _ = harness.train_supervised_only(ds, cfg)
    else:
        model = read_checkpoint(args.init) if args.init else harness.pretrain(ds, cfg)[0]
        if model.spec != cfg.mlp:
            raise ConfigError("initial checkpoint architecture does not match the config")
        model, _ = harness.finetune(model, ds, cfg)
    write_checkpoint(model, args.out)


def cmd_eval(args, cfg):
    test = read_dataset(args.test_data) if args.test_data else harness.make_test_dataset(cfg)
    _check_dataset(test, cfg)
    if args.model:
        policy, method = read_checkpoint(args.model), args.method or "ssl"
    elif args.policy == "full_reuse":
        policy, method = harness.full_reuse_policy, "full_reuse"
    elif args.policy == "wmmse":
        policy, method = harness.wmmse_policy(cfg.network), "wmmse"
    else:
        policy, method = harness.zeros_policy, args.policy
    row = harness.evaluate(policy, test, cfg, method)
    _write(args.out, dumps_metrics([row]))


def cmd_embed(args, cfg):
    ds = read_dataset(args.data)
    model = read_checkpoint(args.model) if args.model else harness.init_model(cfg)
    _write(args.out, harness.export_embeddings(model, ds))


def cmd_sweep(args, cfg):
    seeds = [int(s) for s in args.seeds.split(",")]
    grid = [int(m) for m in args.grid.split(",")]
    rows = harness.sweep(cfg, seeds, grid)
    _write(args.out, dumps_metrics(rows))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tincl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a channel dataset file")
    p.add_argument("--out", required=True)
    p.add_argument("--test", action="store_true", help="generate the held-out test set instead")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("label", help="add WMMSE labels to the first m_labeled samples")
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.add_argument("--count", type=int)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("pretrain", help="contrastive pre-training of the backbone")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--loss-log")
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("train", help="fine-tune (ssl) or train from scratch (sl_only)")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=("ssl", "sl_only"), default="ssl")
    p.add_argument("--init", help="pre-trained checkpoint (ssl); pre-trains if omitted")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="normalised sum-rate of a model or baseline on the test set")
    who = p.add_mutually_exclusive_group(required=True)
    who.add_argument("--model")
    who.add_argument("--policy", choices=sorted(POLICIES))
    p.add_argument("--method", help="method label for a model row (default ssl)")
    p.add_argument("--test-data")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("embed", help="export embeddings with binarised WMMSE labels")
    p.add_argument("--data", required=True)
    p.add_argument("--model", help="checkpoint; the seeded initial model if omitted")
    p.add_argument("--out")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("sweep", help="all methods over seeds and label budgets")
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--grid", default="25,50,100,200,400,800")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    for p in sub.choices.values():
        _add_run_flags(p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        cfg = resolve_config(args)
        args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
