"""Seeded, configurable experiment runner.

Reproduces the round-based comparison protocol: for each configured
algorithm and trial, run the matching driver on derived random streams,
record per-round error ratios and residual norms, aggregate trial means,
and evaluate the theoretical error bound alongside the empirical means
where it applies.  Reports serialize to a stable JSON schema plus a
plot-ready curves CSV.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import data_io
from .adaptive import AdaptiveConfig, ResidualMode, _run_rounds, theorem1_bound
from .linalg import as_matrix, frobenius_tail, projection_error_profile, svd
from .rng import RngStream
from .samplers import SamplerKind, SamplerSpec

#: Factor of slack applied when flagging empirical means above the bound.
BOUND_SLACK = 1.05

_SAMPLER_SUFFIX = {
    "Nopt": SamplerKind.NEAR_OPTIMAL,
    "LVG": SamplerKind.LEVERAGE_SCORE,
    "AE": SamplerKind.ADDITIVE_ERROR,
}


@dataclass(frozen=True)
class Algorithm:
    """A named (driver, sampler) pairing from the experiment legend."""

    name: str
    driver: str  # "adaptive" | "dv06" | "oneshot"
    sampler: SamplerSpec


def parse_algorithm(name: str) -> Algorithm:
    """Resolve an algorithm legend name.

    ADP-Nopt and ADP-LVG run the truncated-residual driver; ADP-AE is the
    prior method and keeps its full-projection residual.  DV06-<sampler>
    forces the full-projection residual; SEQ-<sampler> is one-shot
    continued sampling.
    """
    prefix, _, suffix = name.partition("-")
    sampler_kind = _SAMPLER_SUFFIX.get(suffix)
    if sampler_kind is None or prefix not in {"ADP", "DV06", "SEQ"}:
        valid = ", ".join(
            f"{p}-{s}" for p in ("ADP", "DV06", "SEQ") for s in _SAMPLER_SUFFIX
        )
        raise ValueError(f"unknown algorithm {name!r}; valid names: {valid}")
    if prefix == "SEQ":
        driver = "oneshot"
    elif prefix == "DV06" or name == "ADP-AE":
        driver = "dv06"
    else:
        driver = "adaptive"
    return Algorithm(name=name, driver=driver, sampler=SamplerSpec(sampler_kind))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment run."""

    dataset: data_io.SyntheticSpec | str
    k: int
    c: int
    t: int
    algorithms: tuple[str, ...]
    trials: int = 5
    seed: int = 0
    threads: int | None = None
    epsilon: float | None = None
    same_initial: bool = False
    fill_missing: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if self.k < 1 or self.c < 1 or self.t < 1:
            raise ValueError("k, c and t must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        for name in self.algorithms:
            parse_algorithm(name)
        if self.epsilon is not None and not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")

    def dataset_echo(self) -> dict:
        if isinstance(self.dataset, str):
            return {"kind": "file", "path": self.dataset}
        spec = self.dataset
        spectrum: dict = {"kind": type(spec.spectrum).__name__.lower()}
        spectrum.update(asdict(spec.spectrum))
        if "sigma" in spectrum:
            spectrum["sigma"] = list(spectrum["sigma"])
        return {
            "kind": "synthetic",
            "rows": spec.m,
            "cols": spec.n,
            "seed": spec.seed,
            "spectrum": spectrum,
        }

    def echo(self) -> dict:
        return {
            "dataset": self.dataset_echo(),
            "k": self.k,
            "c": self.c,
            "rounds": self.t,
            "trials": self.trials,
            "algorithms": list(self.algorithms),
            "seed": self.seed,
            "threads": self.threads,
            "epsilon": self.epsilon,
            "same_initial": self.same_initial,
            "fill_missing": self.fill_missing,
        }


@dataclass(frozen=True)
class Row:
    """One (algorithm, trial, round) measurement."""

    algorithm: str
    trial: int
    round: int
    error_ratio: float
    residual_fro: float
    full_projection_fro: float
    requested_columns: int
    distinct_columns: int
    n_dropped: int
    wall_time_s: float
    early_stop: bool


@dataclass(frozen=True)
class RunReport:
    """Per-trial rows plus aggregate curves, bound section, and config echo."""

    config: dict
    seeds: dict
    dataset: dict
    rows: tuple[Row, ...] = field(default=())
    curves: tuple[dict, ...] = field(default=())
    bound: tuple[dict, ...] = field(default=())

    def to_dict(self, include_timings: bool = True) -> dict:
        rows = []
        for row in self.rows:
            entry = asdict(row)
            if not include_timings:
                entry.pop("wall_time_s")
            rows.append(entry)
        return {
            "config": self.config,
            "seeds": self.seeds,
            "dataset": self.dataset,
            "rows": rows,
            "curves": [dict(c) for c in self.curves],
            "bound": [dict(b) for b in self.bound],
        }

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2, sort_keys=True) + "\n"


#: JSON schema the report contract is pinned to (timing fields optional so
#: the timing-stripped serialization validates too).
REPORT_SCHEMA = {
    "type": "object",
    "required": ["config", "seeds", "dataset", "rows", "curves", "bound"],
    "additionalProperties": False,
    "properties": {
        "config": {"type": "object"},
        "seeds": {"type": "object"},
        "dataset": {
            "type": "object",
            "required": ["rows", "cols", "rank"],
        },
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "algorithm",
                    "trial",
                    "round",
                    "error_ratio",
                    "residual_fro",
                    "full_projection_fro",
                    "requested_columns",
                    "distinct_columns",
                    "n_dropped",
                    "early_stop",
                ],
                "additionalProperties": False,
                "properties": {
                    "algorithm": {"type": "string"},
                    "trial": {"type": "integer", "minimum": 0},
                    "round": {"type": "integer", "minimum": 1},
                    "error_ratio": {"type": "number"},
                    "residual_fro": {"type": "number", "minimum": 0},
                    "full_projection_fro": {"type": "number", "minimum": 0},
                    "requested_columns": {"type": "integer", "minimum": 1},
                    "distinct_columns": {"type": "integer", "minimum": 0},
                    "n_dropped": {"type": "integer", "minimum": 0},
                    "wall_time_s": {"type": "number", "minimum": 0},
                    "early_stop": {"type": "boolean"},
                },
            },
        },
        "curves": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["algorithm", "round", "trials", "mean_ratio", "std_ratio", "mean_sq_residual"],
                "additionalProperties": False,
                "properties": {
                    "algorithm": {"type": "string"},
                    "round": {"type": "integer", "minimum": 1},
                    "trials": {"type": "integer", "minimum": 1},
                    "mean_ratio": {"type": "number"},
                    "std_ratio": {"type": "number", "minimum": 0},
                    "mean_sq_residual": {"type": "number", "minimum": 0},
                },
            },
        },
        "bound": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["algorithm", "round", "epsilon", "bound_sq", "mean_sq_residual", "exceeded"],
                "additionalProperties": False,
                "properties": {
                    "algorithm": {"type": "string"},
                    "round": {"type": "integer", "minimum": 1},
                    "epsilon": {"type": "number"},
                    "bound_sq": {"type": "number", "minimum": 0},
                    "mean_sq_residual": {"type": "number", "minimum": 0},
                    "exceeded": {"type": "boolean"},
                },
            },
        },
    },
}


def load_dataset(cfg: ExperimentConfig) -> np.ndarray:
    """Materialize the configured dataset (synthetic or file-backed)."""
    if isinstance(cfg.dataset, str):
        arr = data_io.load_matrix(cfg.dataset)
    else:
        arr = data_io.generate_synthetic(cfg.dataset)
    if cfg.fill_missing:
        arr = data_io.fill_missing_ternary(arr, RngStream(cfg.seed).child("fill-missing"))
    arr = as_matrix(arr, allow_nan=True)
    if np.isnan(arr).any():
        raise ValueError(
            "dataset contains missing values; enable fill_missing or preprocess it"
        )
    return arr


def _run_task(arr, f_a, cfg: ExperimentConfig, alg: Algorithm, trial: int) -> list[Row]:
    stream = RngStream(cfg.seed).child("trial", trial)
    rows: list[Row] = []
    if alg.driver == "oneshot":
        den = math.sqrt(frobenius_tail(f_a.sigma, cfg.k))
        for round in range(1, cfg.t + 1):
            start = time.perf_counter()
            requested = round * cfg.c
            selected = alg.sampler.sample(arr, cfg.k, requested, stream.child("oneshot", round))
            full_sq, by_rank = projection_error_profile(
                arr, arr[:, selected.as_array()], (cfg.k, round * cfg.k)
            )
            rows.append(
                Row(
                    algorithm=alg.name,
                    trial=trial,
                    round=round,
                    error_ratio=math.sqrt(by_rank[cfg.k]) / den,
                    residual_fro=math.sqrt(by_rank[round * cfg.k]),
                    full_projection_fro=math.sqrt(full_sq),
                    requested_columns=requested,
                    distinct_columns=len(selected),
                    n_dropped=requested - len(selected),
                    wall_time_s=time.perf_counter() - start,
                    early_stop=False,
                )
            )
        return rows

    mode = (
        ResidualMode.TRUNCATED_RANK_LK if alg.driver == "adaptive" else ResidualMode.FULL_PROJECTION
    )
    run_cfg = AdaptiveConfig(
        k=cfg.k,
        t=cfg.t,
        c=cfg.c,
        sampler=alg.sampler,
        residual_mode=mode,
        initial_sampler=SamplerSpec(SamplerKind.NEAR_OPTIMAL) if cfg.same_initial else None,
    )
    selected, traces = _run_rounds(arr, run_cfg, stream)
    distinct = 0
    for trace in traces:
        distinct += len(trace.new_indices)
        rows.append(
            Row(
                algorithm=alg.name,
                trial=trial,
                round=trace.round,
                error_ratio=trace.error_ratio,
                residual_fro=trace.residual_fro,
                full_projection_fro=trace.full_projection_fro,
                requested_columns=trace.round * cfg.c,
                distinct_columns=distinct,
                n_dropped=trace.n_dropped,
                wall_time_s=trace.wall_time_s,
                early_stop=trace.early_stop,
            )
        )
    return rows


def _aggregate(rows: list[Row]) -> list[dict]:
    groups: dict[tuple[str, int], list[Row]] = {}
    for row in rows:
        groups.setdefault((row.algorithm, row.round), []).append(row)
    curves = []
    for (algorithm, round), members in sorted(groups.items()):
        ratios = np.array([m.error_ratio for m in members])
        residuals = np.array([m.residual_fro for m in members])
        curves.append(
            {
                "algorithm": algorithm,
                "round": round,
                "trials": len(members),
                "mean_ratio": float(ratios.mean()),
                "std_ratio": float(ratios.std()),  # population std (ddof=0)
                "mean_sq_residual": float((residuals**2).mean()),
            }
        )
    return curves


def compare_bound(cfg: ExperimentConfig, curves: list[dict], sigma) -> list[dict]:
    """Theoretical bound next to the empirical per-round mean squared errors.

    Applies to truncated-residual (adaptive-driver) algorithms only, with
    epsilon = 2k/c for the near-optimal sampler (when below 1) and the
    user-supplied epsilon otherwise.  Rounds whose empirical mean exceeds
    bound * 1.05 are flagged.
    """
    section = []
    by_key = {(c["algorithm"], c["round"]): c for c in curves}
    for name in cfg.algorithms:
        alg = parse_algorithm(name)
        if alg.driver != "adaptive":
            continue
        if alg.sampler.kind is SamplerKind.NEAR_OPTIMAL:
            epsilon = 2.0 * cfg.k / cfg.c
            if not 0.0 < epsilon < 1.0:
                epsilon = cfg.epsilon
        else:
            epsilon = cfg.epsilon
        if epsilon is None or not 0.0 < epsilon < 1.0:
            continue
        for round in range(1, cfg.t + 1):
            curve = by_key.get((name, round))
            if curve is None or round * cfg.k > len(sigma):
                continue
            bound_sq = theorem1_bound(sigma, cfg.k, round, epsilon)
            section.append(
                {
                    "algorithm": name,
                    "round": round,
                    "epsilon": epsilon,
                    "bound_sq": bound_sq,
                    "mean_sq_residual": curve["mean_sq_residual"],
                    "exceeded": curve["mean_sq_residual"] > bound_sq * BOUND_SLACK,
                }
            )
    return section


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    """Execute every (algorithm, trial) pair and assemble the report.

    Trials fan out across a thread pool (numpy releases the GIL in the
    underlying factorizations); assembly sorts deterministically by
    (algorithm, trial, round), so the report is byte-stable for a given
    config and seed regardless of scheduling.
    """
    arr = load_dataset(cfg)
    if cfg.k >= min(arr.shape):
        raise ValueError(f"k={cfg.k} must be below min(m, n)={min(arr.shape)}")
    f_a = svd(arr)

    algorithms = [parse_algorithm(name) for name in cfg.algorithms]
    tasks = [(alg, trial) for alg in algorithms for trial in range(cfg.trials)]
    workers = cfg.threads or os.cpu_count() or 1
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            results = list(pool.map(lambda at: _run_task(arr, f_a, cfg, *at), tasks))
    else:
        results = [_run_task(arr, f_a, cfg, alg, trial) for alg, trial in tasks]

    rows = sorted(
        (row for chunk in results for row in chunk),
        key=lambda r: (r.algorithm, r.trial, r.round),
    )
    curves = _aggregate(rows)
    bound = compare_bound(cfg, curves, f_a.sigma)
    return RunReport(
        config=cfg.echo(),
        seeds={
            "master": cfg.seed,
            "derivation": "child('trial', i) per trial; drivers draw from "
            "child('round', l), one-shot runs from child('oneshot', l)",
        },
        dataset={"rows": arr.shape[0], "cols": arr.shape[1], "rank": f_a.rank},
        rows=tuple(rows),
        curves=tuple(curves),
        bound=tuple(bound),
    )


def write_report(report: RunReport, out_dir, figures: bool = True) -> list[Path]:
    """Write report.json, curves.csv and (optionally) rendered figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "report.json", out / "curves.csv"]
    paths[0].write_text(report.to_json())
    with open(paths[1], "w", newline="") as handle:
        handle.write("algorithm,round,mean_ratio,std_ratio\n")
        for curve in report.curves:
            handle.write(
                f"{curve['algorithm']},{curve['round']},"
                f"{curve['mean_ratio']:.17g},{curve['std_ratio']:.17g}\n"
            )
    if figures:
        from . import figures as figmod

        paths.append(figmod.render_curves(report, out / "curves.png"))
        if report.bound:
            paths.append(figmod.render_bound(report, out / "bound.png"))
    return paths
