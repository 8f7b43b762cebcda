"""Sensitivity of the low-label results to how the head reads the embedding.

Compares the default (head on the raw embedding, contrastive loss on the
normalised one) with the head reading the normalised embedding, plus a
fine-tune-from-scratch ablation that skips pre-training.

    python scripts/head_input_sensitivity.py --n 8 --m-labeled 50,100 --seeds 0
"""
import argparse

import numpy as np

from tincl import harness
from tincl.config import RunConfig
from tincl.netsim import Dataset, generate_dataset
from tincl.wmmse import label_dataset


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--m-labeled", default="50,100")
    ap.add_argument("--seeds", default="0")
    args = ap.parse_args()
    budgets = [int(m) for m in args.m_labeled.split(",")]

    results = {}
    for seed in map(int, args.seeds.split(",")):
        for head_norm in (False, True):
            cfg = RunConfig.sum_rate_study(n=args.n, seed=seed).replace(head_on_normalized=head_norm)
            train = label_dataset(generate_dataset(seed, cfg.m_total, cfg.network), max(budgets))
            test = harness.make_test_dataset(cfg)
            ref = harness.reference_sum_rates(test)
            pre = harness.pretrain(train, cfg)[0]
            for m in budgets:
                c = cfg.replace(m_labeled=m)
                ds = Dataset(train.config, train.channels, train.labels[:m], seed)
                variants = {
                    "ssl": harness.finetune(pre, ds, c)[0],
                    "no_pretrain": harness.finetune(harness.init_model(c), ds, c)[0],
                    "sl_only": harness.train_supervised_only(ds, c)[0],
                }
                for name, model in variants.items():
                    key = (head_norm, m, name)
                    val = harness.normalized_sum_rates(model, test, ref).mean()
                    results.setdefault(key, []).append(val)

    for (head_norm, m, name), vals in sorted(results.items()):
        head = "normalised" if head_norm else "raw"
        print(f"head={head:10s} m_labeled={m:4d} {name:12s} {np.mean(vals):.4f}")


if __name__ == "__main__":
    main()
