"""Command line interface: `gen`, `run`, `bound`, and `oracle` subcommands.

`run` accepts a JSON config file (--config) whose values individual flags
override.  Machine-readable results go to stdout as JSON; experiment runs
write report.json, curves.csv and rendered figures into --out.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import data_io, oracle
from .adaptive import theorem1_bound
from .experiment import ExperimentConfig, run_experiment, write_report
from .rng import RngStream


def _parse_dims(text: str) -> tuple[int, int]:
    rows, _, cols = text.lower().partition("x")
    return int(rows), int(cols)


def _spectrum_from_args(kind: str, exponent, rate, values) -> data_io.Spectrum:
    if kind == "powerlaw":
        return data_io.PowerLaw(exponent) if exponent is not None else data_io.PowerLaw()
    if kind == "exponential":
        return data_io.Exponential(rate) if rate is not None else data_io.Exponential()
    if kind == "explicit":
        if not values:
            raise ValueError("explicit spectrum requires --values")
        return data_io.ExplicitSpectrum(tuple(float(v) for v in values.split(",")))
    raise ValueError(f"unknown spectrum kind {kind!r}")


def _dataset_from_dict(entry: dict):
    kind = entry.get("kind", "synthetic")
    if kind == "file":
        return str(entry["path"])
    if kind != "synthetic":
        raise ValueError(f"unknown dataset kind {kind!r}")
    spectrum_kind = entry.get("spectrum", "exponential")
    spectrum = _spectrum_from_args(
        spectrum_kind,
        entry.get("exponent"),
        entry.get("rate"),
        ",".join(str(v) for v in entry.get("sigma", [])) or None,
    )
    return data_io.SyntheticSpec(
        m=int(entry["rows"]), n=int(entry["cols"]), spectrum=spectrum, seed=int(entry.get("seed", 0))
    )


def _dataset_from_synthetic_flag(text: str):
    # "MxN:kind[:param][:seed]" where param is exponent/rate or an explicit
    # comma list; e.g. 200x2000:exponential:0.1:7
    parts = text.split(":")
    m, n = _parse_dims(parts[0])
    kind = parts[1] if len(parts) > 1 else "exponential"
    param = parts[2] if len(parts) > 2 else None
    seed = int(parts[3]) if len(parts) > 3 else 0
    if kind == "explicit":
        spectrum = _spectrum_from_args(kind, None, None, param)
    else:
        value = float(param) if param is not None else None
        spectrum = _spectrum_from_args(kind, value, value, None)
    return data_io.SyntheticSpec(m=m, n=n, spectrum=spectrum, seed=seed)


def _cmd_gen(args) -> int:
    spectrum = _spectrum_from_args(args.spectrum, args.exponent, args.rate, args.values)
    spec = data_io.SyntheticSpec(m=args.rows, n=args.cols, spectrum=spectrum, seed=args.seed)
    data_io.save_matrix(data_io.generate_synthetic(spec), args.out)
    print(args.out)
    return 0


def _cmd_run(args) -> int:
    settings: dict = {}
    if args.config:
        with open(args.config) as handle:
            settings = json.load(handle)

    dataset = None
    if args.data:
        dataset = args.data
    elif args.synthetic:
        dataset = _dataset_from_synthetic_flag(args.synthetic)
    elif "dataset" in settings:
        dataset = _dataset_from_dict(settings["dataset"])
    if dataset is None:
        raise ValueError("no dataset: pass --data/--synthetic or a config with a dataset entry")

    def pick(flag, key, default):
        return flag if flag is not None else settings.get(key, default)

    algs = args.algs.split(",") if args.algs else settings.get("algorithms", ["ADP-Nopt"])
    cfg = ExperimentConfig(
        dataset=dataset,
        k=int(pick(args.k, "k", 5)),
        c=int(pick(args.c, "c", 10)),
        t=int(pick(args.rounds, "rounds", 10)),
        algorithms=tuple(algs),
        trials=int(pick(args.trials, "trials", 5)),
        seed=int(pick(args.seed, "seed", 0)),
        threads=pick(args.threads, "threads", None),
        epsilon=pick(args.epsilon, "epsilon", None),
        same_initial=bool(pick(args.same_initial or None, "same_initial", False)),
        fill_missing=bool(pick(args.fill_missing or None, "fill_missing", False)),
    )
    report = run_experiment(cfg)
    paths = write_report(report, args.out, figures=not args.no_figures)
    for path in paths:
        print(path)
    return 0


def _cmd_bound(args) -> int:
    sigma = np.asarray(data_io.load_csv(args.spectrum), dtype=float).ravel()
    if args.per_round:
        values = {t: theorem1_bound(sigma, args.k, t, args.epsilon) for t in range(1, args.rounds + 1)}
        payload = {
            "k": args.k,
            "epsilon": args.epsilon,
            "bound_sq_per_round": {str(t): v for t, v in values.items()},
        }
    else:
        payload = {
            "k": args.k,
            "rounds": args.rounds,
            "epsilon": args.epsilon,
            "bound_sq": theorem1_bound(sigma, args.k, args.rounds, args.epsilon),
        }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_oracle(args) -> int:
    if args.check == "best-subset":
        if not args.data:
            raise ValueError("best-subset requires --data")
        result = oracle.exhaustive_best_subset(
            data_io.load_matrix(args.data), args.c, args.k, max_subsets=args.max_subsets
        )
        payload = {
            "indices": list(result.indices),
            "error": result.error,
            "examined": result.examined,
        }
    elif args.check == "lemma1":
        ranks = [int(v) for v in args.y_ranks.split(",")]
        gen = RngStream(args.seed).child("lemma1-x").generator()
        failures = 0
        for i in range(args.instances):
            x = gen.standard_normal((args.rows, args.cols))
            rank = ranks[i % len(ranks)]
            if not oracle.lemma1_check(x, rank, RngStream(args.seed).child("lemma1-y", i)):
                failures += 1
        payload = {"instances": args.instances, "failures": failures, "passed": failures == 0}
    else:  # svd-check
        if not args.data:
            raise ValueError("svd-check requires --data")
        payload = oracle.svd_self_check(data_io.load_matrix(args.data))
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cssp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a synthetic matrix with a prescribed spectrum")
    gen.add_argument("--rows", type=int, required=True)
    gen.add_argument("--cols", type=int, required=True)
    gen.add_argument("--spectrum", choices=["powerlaw", "exponential", "explicit"], default="exponential")
    gen.add_argument("--exponent", type=float, help="power-law exponent (default 0.3)")
    gen.add_argument("--rate", type=float, help="exponential decay rate (default 0.1)")
    gen.add_argument("--values", help="comma-separated explicit singular values")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output path (.csv or binary .mat)")
    gen.set_defaults(func=_cmd_gen)

    run = sub.add_parser("run", help="run a column-selection experiment")
    run.add_argument("--config", help="JSON config file; flags override its values")
    run.add_argument("--data", help="matrix file (.csv or binary)")
    run.add_argument("--synthetic", help="inline synthetic spec: MxN:kind[:param][:seed]")
    run.add_argument("--k", type=int)
    run.add_argument("--c", type=int)
    run.add_argument("--rounds", type=int)
    run.add_argument("--trials", type=int)
    run.add_argument("--algs", help="comma-separated algorithm names, e.g. ADP-Nopt,SEQ-Nopt")
    run.add_argument("--seed", type=int)
    run.add_argument("--threads", type=int)
    run.add_argument("--epsilon", type=float, help="relative-error parameter for the bound section")
    run.add_argument("--same-initial", action="store_true", dest="same_initial")
    run.add_argument("--fill-missing", action="store_true", dest="fill_missing")
    run.add_argument("--no-figures", action="store_true")
    run.add_argument("--out", required=True, help="output directory")
    run.set_defaults(func=_cmd_run)

    bound = sub.add_parser("bound", help="evaluate the adaptive error bound from a spectrum file")
    bound.add_argument("--spectrum", required=True, help="CSV holding the singular values")
    bound.add_argument("--k", type=int, required=True)
    bound.add_argument("--rounds", type=int, required=True)
    bound.add_argument("--epsilon", type=float, required=True)
    bound.add_argument("--per-round", action="store_true", dest="per_round")
    bound.set_defaults(func=_cmd_bound)

    orc = sub.add_parser("oracle", help="run a brute-force reference check")
    orc.add_argument("check", choices=["best-subset", "lemma1", "svd-check"])
    orc.add_argument("--data", help="matrix file for best-subset / svd-check")
    orc.add_argument("--c", type=int, default=2)
    orc.add_argument("--k", type=int, default=1)
    orc.add_argument("--max-subsets", type=int, default=oracle.MAX_SUBSETS)
    orc.add_argument("--instances", type=int, default=1000)
    orc.add_argument("--rows", type=int, default=8)
    orc.add_argument("--cols", type=int, default=10)
    orc.add_argument("--y-ranks", default="1,2,3", dest="y_ranks")
    orc.add_argument("--seed", type=int, default=0)
    orc.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
