"""Per-edge error rates for the local test against a Fisher baseline.

Replicates a clique-difference scenario: the two groups share every
edge probability except within a small clique, where the association
is strong. Each replicate is fit once; flagged edges from the
posterior exceedance rule are compared with edge-wise Fisher exact
tests under Benjamini-Hochberg, pooling confusion counts across
replicates.

Usage:
    python3 scripts/local_power_study.py --out results/local_power
    python3 scripts/local_power_study.py --reps 3 --n-per-group 30
"""
from __future__ import annotations

import argparse
import csv
import time
from pathlib import Path

import numpy as np

from netmix.core import edge_count, sample_cohort
from netmix.inference import CohortData, SamplerConfig, run_chain
from netmix.priors import HyperParameters
from netmix.synthetic import clique_difference_truth
from netmix.testing import compute_test_report, fisher_baseline


def confusion(flags, true_mask):
    tp = int(np.sum(flags & true_mask))
    fp = int(np.sum(flags & ~true_mask))
    fn = int(np.sum(~flags & true_mask))
    tn = int(np.sum(~flags & ~true_mask))
    return tp, fp, fn, tn


def rates(tp, fp, fn, tn):
    type1 = fp / max(fp + tn, 1)
    type2 = fn / max(fn + tp, 1)
    fdr = fp / max(tp + fp, 1)
    return type1, type2, fdr


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/local_power"))
    ap.add_argument("--v", type=int, default=20)
    ap.add_argument("--clique-size", type=int, default=5)
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--n-per-group", type=int, default=20)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--cutoff", type=float, default=0.95)
    ap.add_argument("--fdr-level", type=float, default=0.05)
    ap.add_argument("--h", type=int, default=4)
    ap.add_argument("--r", type=int, default=2)
    ap.add_argument("--n-iter", type=int, default=1000)
    ap.add_argument("--burn-in", type=int, default=400)
    ap.add_argument("--thin", type=int, default=3)
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    L = edge_count(args.v)
    pooled = {"model": [0, 0, 0, 0], "fisher": [0, 0, 0, 0]}
    rows = []
    t0 = time.time()
    for rep in range(args.reps):
        truth = clique_difference_truth(args.v, clique_size=args.clique_size,
                                        seed=rep)
        true_mask = np.zeros(L, dtype=bool)
        true_mask[truth.different_edges] = True

        rng = np.random.default_rng([rep, 5])
        obs = sample_cohort(truth.params, args.n_per_group,
                            args.n_per_group, rng)
        cohort = CohortData.from_observations(obs)
        hyper = HyperParameters(V=args.v, H=args.h, R=args.r)
        config = SamplerConfig(n_iter=args.n_iter, burn_in=args.burn_in,
                               thin=args.thin, seed=rep)
        draws = run_chain(cohort, hyper, config)
        report = compute_test_report(draws, epsilon=args.epsilon,
                                     cutoff=args.cutoff)
        model_flags = report.significant_edges
        fisher_flags = fisher_baseline(obs, fdr_level=args.fdr_level)

        for name, flags in (("model", model_flags), ("fisher", fisher_flags)):
            cm = confusion(flags, true_mask)
            pooled[name] = [a + b for a, b in zip(pooled[name], cm)]
            rows.append((rep, name) + cm + rates(*cm))
        print(f"rep {rep}: model flags={int(model_flags.sum())} "
              f"fisher flags={int(fisher_flags.sum())} "
              f"(true={len(truth.different_edges)})")

    with open(args.out / "local_power.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "method", "tp", "fp", "fn", "tn",
                         "type1", "type2", "fdr"])
        writer.writerows(rows)

    print(f"\n{args.reps} replicates in {time.time() - t0:.0f}s, pooled:")
    print(f"{'method':>7} {'type I':>7} {'type II':>8} {'FDR':>6}")
    for name in ("model", "fisher"):
        t1, t2, fdr = rates(*pooled[name])
        print(f"{name:>7} {t1:>7.4f} {t2:>8.4f} {fdr:>6.4f}")
    print(f"wrote {args.out / 'local_power.csv'}")


if __name__ == "__main__":
    main()
