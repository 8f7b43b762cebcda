"""Normalised sum-rate versus label budget for several network sizes.

Runs ssl, sl_only, full_reuse and wmmse for every (n, seed, m_labeled) and
writes one metrics CSV per network size plus a compact table to stdout.

    python scripts/sum_rate_sweep.py --sizes 8,10,12 --seeds 0,1,2 --out results/sweep
"""
import argparse
import logging
import time
from pathlib import Path

from tincl import harness
from tincl.config import RunConfig
from tincl.fileio import dumps_metrics


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="8,10,12")
    ap.add_argument("--seeds", default="0,1,2")
    ap.add_argument("--grid", default="25,50,100,200,400,800")
    ap.add_argument("--out", default="results/sweep")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seeds = [int(s) for s in args.seeds.split(",")]
    grid = [int(m) for m in args.grid.split(",")]
    for n in map(int, args.sizes.split(",")):
        t0 = time.time()
        rows = harness.sweep(RunConfig.sum_rate_study(n=n), seeds, grid)
        (out / f"metrics_n{n}.csv").write_text(dumps_metrics(rows))
        print(f"n={n} ({time.time() - t0:.0f}s)")
        print(f"  {'m_labeled':>9}  {'ssl':>15}  {'sl_only':>15}  {'full_reuse':>15}")
        agg = {(r.m_labeled, r.method): r for r in rows if r.run_id == "aggregate"}
        for m in grid:
            cells = [f"{agg[m, k].normalized_sum_rate_mean:.3f} +- {agg[m, k].normalized_sum_rate_std:.3f}"
                     for k in ("ssl", "sl_only", "full_reuse")]
            print(f"  {m:>9}  " + "  ".join(f"{c:>15}" for c in cells))


if __name__ == "__main__":
    main()
