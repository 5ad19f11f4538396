"""In- and out-of-sample classification accuracy of the fitted mixture.

Fits the model on a training split of a synthetic cohort and scores
both splits with the posterior predictive class probability. Two
scenarios: groups with separated mixtures (easy) and groups whose edge
probabilities overlap heavily (hard, AUC should sit near chance).

Usage:
    python3 scripts/classification_study.py --out results/classification
    python3 scripts/classification_study.py --reps 2 --n-per-group 40
"""
from __future__ import annotations

import argparse
import csv
import time
from pathlib import Path

import numpy as np

from netmix.core import sample_cohort
from netmix.inference import CohortData, SamplerConfig, run_chain
from netmix.priors import HyperParameters
from netmix.synthetic import null_mixture_truth, separable_truth
from netmix.testing import classify, evaluate_classifier


def split(observations, held_every=4):
    train = [o for i, o in enumerate(observations) if i % held_every != 3]
    held = [o for i, o in enumerate(observations) if i % held_every == 3]
    return train, held


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/classification"))
    ap.add_argument("--v", type=int, default=20)
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--n-per-group", type=int, default=50)
    ap.add_argument("--h", type=int, default=3)
    ap.add_argument("--r", type=int, default=2)
    ap.add_argument("--n-iter", type=int, default=800)
    ap.add_argument("--burn-in", type=int, default=300)
    ap.add_argument("--thin", type=int, default=2)
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    scenarios = [("separable", separable_truth), ("overlap", null_mixture_truth)]
    rows = []
    t0 = time.time()
    for name, builder in scenarios:
        for rep in range(args.reps):
            truth = builder(args.v, seed=rep)
            rng = np.random.default_rng([rep, 21])
            obs = sample_cohort(truth.params, args.n_per_group,
                                args.n_per_group, rng)
            train, held = split(obs)
            hyper = HyperParameters(V=args.v, H=args.h, R=args.r)
            config = SamplerConfig(n_iter=args.n_iter, burn_in=args.burn_in,
                                   thin=args.thin, seed=rep)
            draws = run_chain(CohortData.from_observations(train),
                              hyper, config)
            auc_in, acc_in = evaluate_classifier(classify(draws, train))
            auc_out, acc_out = evaluate_classifier(classify(draws, held))
            rows.append((name, rep, auc_in, acc_in, auc_out, acc_out))
            print(f"{name} rep={rep}: in AUC={auc_in:.3f} acc={acc_in:.3f}  "
                  f"out AUC={auc_out:.3f} acc={acc_out:.3f}")

    with open(args.out / "classification.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "rep", "auc_in", "acc_in",
                         "auc_out", "acc_out"])
        writer.writerows(rows)

    print(f"\n{len(rows)} fits in {time.time() - t0:.0f}s")
    for name, _ in scenarios:
        sub = np.array([r[2:] for r in rows if r[0] == name])
        mean = sub.mean(axis=0)
        print(f"{name}: mean in AUC={mean[0]:.3f} acc={mean[1]:.3f}  "
              f"out AUC={mean[2]:.3f} acc={mean[3]:.3f}")
    print(f"wrote {args.out / 'classification.csv'}")


if __name__ == "__main__":
    main()
