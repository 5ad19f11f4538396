"""Command line interface.

Subcommands cover the full workflow on files: simulate a synthetic
cohort, fit the model, run the group-difference tests, score subjects,
and render a markdown report. All outputs are deterministic given the
inputs and seed; errors come back as a one-line diagnostic on stderr and
a nonzero exit code.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import dataio, synthetic
from .core import MixtureParameters, sample_cohort
from .dataio import ConfigError, DataFormatError, NetmixError
from .inference import CohortData, PosteriorDraws, SamplerConfig, run_chain
from .priors import HyperParameters, sample_prior
from .testing import (classify, compute_test_report, evaluate_classifier,
                      test_degree)

_SCENARIO_BUILDERS = {
    "shifted": (synthetic.shifted_mixture_truth, ("shift",)),
    "null": (synthetic.null_mixture_truth, ("shift",)),
    "clique": (synthetic.clique_difference_truth, ("clique_size", "low", "high")),
    "separable": (synthetic.separable_truth, ("shift",)),
    "rank1": (synthetic.rank_one_truth, ("weight", "share")),
}

_HYPER_CONFIG_KEYS = {"h": "H", "r": "R", "a0": "a0", "a1": "a1",
                      "z_mean": "z_mean", "z_var": "z_var",
                      "mig_a1": "mig_a1", "mig_a2": "mig_a2",
                      "dirichlet_conc": "dirichlet_conc",
                      "prior_t1": "prior_T1"}


def _build_hyper(cfg: dict, V: int) -> HyperParameters:
    if "v" in cfg and cfg["v"] != V:
        raise ConfigError(f"config says v={cfg['v']} but the data has V={V} nodes")
    kwargs = {target: cfg[key] for key, target in _HYPER_CONFIG_KEYS.items()
              if key in cfg}
    try:
        return HyperParameters(V=V, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_sampler(cfg: dict, seed_flag: int | None,
                   record_pi: bool = False) -> SamplerConfig:
    kwargs = {k: cfg[k] for k in ("n_iter", "burn_in", "thin") if k in cfg}
    seed = seed_flag if seed_flag is not None else cfg.get("seed", 0)
    try:
        return SamplerConfig(seed=seed, record_pi=record_pi or
                             cfg.get("record_pi", False), **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _params_to_json(params: MixtureParameters) -> dict:
    return {
        "Z": params.Z.tolist(),
        "components": [{"X": c.X.tolist(), "lam": c.lam.tolist()}
                       for c in params.components],
        "nu0": params.nu0.tolist(),
        "nu1": params.nu1.tolist(),
        "pY1": params.pY1,
        "T": params.T,
    }


def _cmd_simulate(args) -> int:
    cfg = dataio.parse_config(args.config)
    for key in ("scenario", "v", "n0", "n1"):
        if key not in cfg:
            raise ConfigError(f"simulate config needs key {key!r}")
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    scenario = cfg["scenario"]
    V, n0, n1 = cfg["v"], cfg["n0"], cfg["n1"]
    extra = {}
    if scenario == "prior":
        hyper = _build_hyper(cfg, V)
        params, _ = sample_prior(hyper, np.random.default_rng(seed))
        truth_summary = {}
    else:
        builder, keys = _SCENARIO_BUILDERS[scenario]
        extra = {k: cfg[k] for k in keys if k in cfg}
        truth = builder(V, seed=seed, **extra)
        params = truth.params
        truth_summary = {
            "rho": truth.rho.tolist(),
            "different_edges": [int(l) + 1 for l in truth.different_edges],
            "pi0": truth.pi0.tolist(),
            "pi1": truth.pi1.tolist(),
        }
    observations = sample_cohort(params, n0, n1,
                                 np.random.default_rng([seed, 1]))
    out = Path(args.out_dir)
    manifest_path = dataio.write_dataset(out, observations)
    payload = {"scenario": scenario, "seed": seed, "n0": n0, "n1": n1,
               "options": extra, "params": _params_to_json(params),
               **truth_summary}
    dataio.atomic_write_text(out / "truth.json",
                             json.dumps(payload, sort_keys=True) + "\n")
    print(f"simulate: wrote {len(observations)} subjects (V={V}) to "
          f"{manifest_path}")
    return 0


def _write_draws_csv(draws: PosteriorDraws, path) -> None:
    H = draws.nu.shape[2]
    R = draws.lam.shape[2]
    cols = ["draw", "pY1", "T"]
    cols += [f"nu0_{h + 1}" for h in range(H)]
    cols += [f"nu1_{h + 1}" for h in range(H)]
    cols += [f"lam_{h + 1}_{r + 1}" for h in range(H) for r in range(R)]
    lines = [",".join(cols)]
    fmt = lambda x: format(float(x), ".10g")
    for k in range(draws.n_draws):
        row = [str(k + 1), fmt(draws.pY1[k]), str(int(draws.T[k]))]
        row += [fmt(x) for x in draws.nu[k, 0]]
        row += [fmt(x) for x in draws.nu[k, 1]]
        row += [fmt(x) for x in draws.lam[k].ravel()]
        lines.append(",".join(row))
    dataio.atomic_write_text(path, "\n".join(lines) + "\n")


def _cmd_fit(args) -> int:
    if args.threads < 1:
        raise ConfigError(f"--threads must be positive, got {args.threads}")
    if args.threads > 1:
        print("warning: --threads > 1 requested; running sequentially to "
              "keep results reproducible", file=sys.stderr)
    cfg = dataio.parse_config(args.config) if args.config else {}
    observations, _ = dataio.load_dataset(args.manifest, args.metadata)
    cohort = CohortData.from_observations(observations)
    hyper = _build_hyper(cfg, cohort.V)
    config = _build_sampler(cfg, args.seed)
    try:
        draws = run_chain(cohort, hyper, config)
    except ValueError as exc:
        raise NetmixError(str(exc)) from exc
    out = Path(args.out_dir)
    dataio.save_draws(draws, out / "draws.bin")
    if args.format == "csv":
        _write_draws_csv(draws, out / "draws.csv")
    flag = " (single group)" if cohort.single_group else ""
    print(f"fit: n={cohort.n} V={cohort.V} kept {draws.n_draws} draws{flag} "
          f"-> {out / 'draws.bin'}")
    return 0


def _load_metadata_checked(path, V: int):
    metadata = dataio.load_node_metadata(path)
    if len(metadata) != V:
        raise DataFormatError(f"{path}: {len(metadata)} node rows but the "
                              f"fitted model has V={V} nodes")
    return metadata


def _cmd_test(args) -> int:
    draws = dataio.load_draws(args.archive)
    if args.manifest is not None:
        observations, _ = dataio.load_dataset(args.manifest)
        cohort = CohortData.from_observations(observations)
        if cohort.checksum != draws.meta.get("data_checksum"):
            raise NetmixError(f"{args.manifest}: cohort does not match the "
                              f"one the archive was fit to")
    metadata = None
    if args.metadata is not None:
        metadata = _load_metadata_checked(args.metadata, draws.meta["V"])
    try:
        report = compute_test_report(draws, epsilon=args.epsilon,
                                     cutoff=args.cutoff)
    except ValueError as exc:
        raise NetmixError(str(exc)) from exc
    out = Path(args.out_dir)
    dataio.save_test_report(report, out / "test_report.json")
    dataio.write_edge_table(report, out / "edges.csv", metadata)
    dataio.write_degree_table(test_degree(report.significant_edges),
                              out / "degree.csv", metadata)
    dataio.write_difference_matrix(report, out / "difference_matrix.csv")
    pr = "n/a" if report.pr_H1 is None else format(report.pr_H1, ".4f")
    print(f"test: Pr(group difference)={pr}, "
          f"{int(report.significant_edges.sum())} of {report.L} edges flagged "
          f"-> {out / 'test_report.json'}")
    return 0


def _cmd_predict(args) -> int:
    draws = dataio.load_draws(args.archive)
    source = args.new_data if args.new_data is not None else args.manifest
    observations, _ = dataio.load_dataset(source)
    cohort = CohortData.from_observations(observations)
    if args.new_data is None:
        if cohort.checksum != draws.meta.get("data_checksum"):
            raise NetmixError(f"{args.manifest}: cohort does not match the "
                              f"one the archive was fit to; pass held-out "
                              f"subjects via --new-data")
    try:
        result = classify(draws, cohort)
        auc, accuracy = evaluate_classifier(result)
    except ValueError as exc:
        raise NetmixError(str(exc)) from exc
    out = Path(args.out_dir)
    dataio.write_predictions(result, out / "predictions.csv")
    dataio.save_classification(auc, accuracy, cohort.n,
                               out / "classification.json")
    print(f"predict: n={cohort.n} AUC={auc:.4f} accuracy={accuracy:.4f} "
          f"-> {out / 'predictions.csv'}")
    return 0


def _cmd_report(args) -> int:
    out = Path(args.out_dir)
    fit_meta = None
    archive = Path(args.archive) if args.archive else out / "draws.bin"
    if archive.exists():
        fit_meta = dataio.load_draws(archive).meta
    test_report = None
    if (out / "test_report.json").exists():
        test_report = dataio.load_test_report(out / "test_report.json")
    classification = None
    if (out / "classification.json").exists():
        try:
            classification = json.loads(
                (out / "classification.json").read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataFormatError(
                f"{out / 'classification.json'}: corrupt JSON") from exc
    text = dataio.render_report(fit_meta, test_report, classification)
    dataio.atomic_write_text(out / "report.md", text)
    print(f"report: wrote {out / 'report.md'}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netmix",
        description="Mixture-of-low-rank-factorizations analysis of "
                    "binary network cohorts")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic cohort")
    p.add_argument("--config", required=True, help="scenario config file")
    p.add_argument("--seed", type=int, default=None,
                   help="overrides the config seed")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="run the Gibbs sampler on a cohort")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", default=None,
                   help="hyper/sampler config; defaults apply if omitted")
    p.add_argument("--metadata", default=None, help="node metadata CSV")
    p.add_argument("--seed", type=int, default=None,
                   help="overrides the config seed")
    p.add_argument("--threads", type=int, default=1,
                   help="accepted for interface compatibility; runs "
                        "sequentially")
    p.add_argument("--format", choices=("binary", "csv"), default="binary",
                   help="csv adds a per-draw summary table")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("test", help="group-difference tests from draws")
    p.add_argument("--archive", required=True, help="draws.bin from fit")
    p.add_argument("--epsilon", type=float, default=0.1,
                   help="practical relevance threshold on the association")
    p.add_argument("--cutoff", type=float, default=0.95,
                   help="posterior exceedance cutoff for flagging edges")
    p.add_argument("--manifest", default=None,
                   help="optional: verify the archive matches this cohort")
    p.add_argument("--metadata", default=None, help="node metadata CSV")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("predict", help="score subjects against a fit")
    p.add_argument("--archive", required=True)
    p.add_argument("--manifest", required=True,
                   help="training cohort manifest (checksum verified)")
    p.add_argument("--new-data", default=None,
                   help="manifest of held-out subjects to score instead")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("report", help="render report.md from artifacts")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--archive", default=None,
                   help="draws archive (default: out-dir/draws.bin)")
    p.set_defaults(func=_cmd_report)
    return parser


def run_cli(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NetmixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())
