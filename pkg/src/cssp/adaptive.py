"""Round-based adaptive column selection drivers.

The main driver selects c columns per round from a shrinking residual and,
crucially, truncates the projection used to form that residual at rank
``round * k`` instead of subtracting the full projection.  The full
projection variant (the prior adaptive strategy) and one-shot continued
sampling are provided for comparison, together with a best-of-repeats
booster and the matching error-bound evaluator.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .linalg import (
    RANK_TOL,
    ColumnSet,
    as_matrix,
    fro_norm_sq,
    frobenius_tail,
    rank_k_column_projection,
    svd,
)
from .rng import RngStream
from .samplers import SamplerSpec

#: Residuals at or below this relative Frobenius size trigger early stop.
EARLY_STOP_TOL = 1e-8


class ResidualMode(str, Enum):
    #: E = a - (C C+ a)_{round*k}; the rank-truncated residual.
    TRUNCATED_RANK_LK = "truncated-rank-lk"
    #: E = a - C C+ a; the full-projection residual of the prior strategy.
    FULL_PROJECTION = "full-projection"
    #: No residual: a single sampler invocation (continued sampling).
    ONE_SHOT = "one-shot"


@dataclass(frozen=True)
class AdaptiveConfig:
    """Driver parameters: target rank k, rounds t, and columns per round c.

    `round_columns` optionally overrides c with a per-round schedule (its
    length must equal t).  `initial_sampler` swaps the sampler for round 1
    only, used to give every strategy the same near-optimal starting
    columns when comparing them.
    """

    k: int
    t: int
    c: int
    sampler: SamplerSpec
    residual_mode: ResidualMode = ResidualMode.TRUNCATED_RANK_LK
    round_columns: tuple[int, ...] | None = None
    initial_sampler: SamplerSpec | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.t < 1:
            raise ValueError("t must be at least 1")
        if self.c < 1:
            raise ValueError("c must be at least 1")
        if self.round_columns is not None:
            if len(self.round_columns) != self.t:
                raise ValueError("round_columns must list one c per round")
            if any(ci < 1 for ci in self.round_columns):
                raise ValueError("every round must request at least one column")
        object.__setattr__(self, "residual_mode", ResidualMode(self.residual_mode))

    def columns_for_round(self, round: int) -> int:
        if self.round_columns is not None:
            return self.round_columns[round - 1]
        return self.c

    def sampler_for_round(self, round: int) -> SamplerSpec:
        if round == 1 and self.initial_sampler is not None:
            return self.initial_sampler
        return self.sampler


@dataclass(frozen=True)
class RoundTrace:
    """Per-round record: what was selected and how good the result is.

    `residual_fro` is the driver's own residual norm ||E^round||_F (whose
    truncation rank depends on the residual mode) and `error_ratio` the
    target-rank-k quality metric.  `early_stop` marks the round after which
    the residual was numerically zero and remaining rounds were skipped.
    """

    round: int
    new_indices: tuple[int, ...]
    n_dropped: int
    residual_fro: float
    full_projection_fro: float
    error_ratio: float
    wall_time_s: float
    early_stop: bool = False


def _check_runtime_invariant(a_rank: int, m: int, cfg: AdaptiveConfig) -> None:
    # Each round truncates at round*k, so t*k may not exceed the rank
    # (equality is the exact-capture extreme case and is allowed).
    if cfg.residual_mode is ResidualMode.TRUNCATED_RANK_LK:
        if cfg.t * cfg.k > min(m, a_rank):
            raise ValueError(
                f"t*k = {cfg.t * cfg.k} must not exceed min(m, rank(a)) = "
                f"{min(m, a_rank)} for the per-round truncation to be meaningful"
            )


def _run_rounds(a, cfg: AdaptiveConfig, rng: RngStream):
    arr = as_matrix(a)
    f_a = svd(arr)
    _check_runtime_invariant(f_a.rank, arr.shape[0], cfg)
    if f_a.rank <= cfg.k:
        raise ValueError(f"target rank k={cfg.k} must be below rank(a)={f_a.rank}")
    norm_a_sq = fro_norm_sq(arr)
    ratio_den = math.sqrt(frobenius_tail(f_a.sigma, cfg.k))

    selected = ColumnSet.empty()
    residual = arr
    traces: list[RoundTrace] = []
    for round in range(1, cfg.t + 1):
        start = time.perf_counter()
        sampler = cfg.sampler_for_round(round)
        draw = sampler.sample(residual, cfg.k, cfg.columns_for_round(round), rng.child("round", round))
        chosen = set(selected.indices)
        fresh = [i for i in draw.indices if i not in chosen]
        selected = selected.extended(fresh, round)

        # One orthonormal basis serves the residual update, the full
        # projection error, and the rank-k quality metric.
        c_mat = arr[:, selected.as_array()]
        q = svd(c_mat).u
        mid = q.T @ arr
        f_mid = svd(mid)
        full_sq = max(norm_a_sq - fro_norm_sq(mid), 0.0)
        if cfg.residual_mode is ResidualMode.TRUNCATED_RANK_LK:
            residual = arr - q @ f_mid.truncated(round * cfg.k)
        else:
            residual = arr - q @ mid
        ratio = math.sqrt((full_sq + frobenius_tail(f_mid.sigma, cfg.k))) / ratio_den

        residual_fro = math.sqrt(fro_norm_sq(residual))
        stop = residual_fro <= EARLY_STOP_TOL * math.sqrt(norm_a_sq) and round < cfg.t
        traces.append(
            RoundTrace(
                round=round,
                new_indices=tuple(fresh),
                n_dropped=len(draw.indices) - len(fresh),
                residual_fro=residual_fro,
                full_projection_fro=math.sqrt(full_sq),
                error_ratio=float(ratio),
                wall_time_s=time.perf_counter() - start,
                early_stop=stop,
            )
        )
        if stop:
            break
    return selected, traces


def adaptive_select(a, cfg: AdaptiveConfig, rng: RngStream):
    """Rank-truncated-residual adaptive selection.

    Runs t rounds; round ``l`` samples c columns from the residual
    E = a - (C C+ a)_{(l-1)k} and appends any not already selected
    (re-selected columns are dropped and recorded in the trace).  Stops
    early, flagged on the last trace, if the residual becomes numerically
    zero.  Returns the accumulated :class:`ColumnSet` and per-round traces.
    """
    if cfg.residual_mode is not ResidualMode.TRUNCATED_RANK_LK:
        raise ValueError("adaptive_select requires the truncated residual mode")
    return _run_rounds(a, cfg, rng)


def dv06_adaptive_select(a, cfg: AdaptiveConfig, rng: RngStream):
    """Adaptive selection with the prior full-projection residual
    E = a - C C+ a (no rank truncation)."""
    if cfg.residual_mode is not ResidualMode.FULL_PROJECTION:
        raise ValueError("dv06_adaptive_select requires the full-projection residual mode")
    return _run_rounds(a, cfg, rng)


def continued_select(a, k: int, total_c: int, sampler: SamplerSpec, rng: RngStream) -> ColumnSet:
    """Continued (one-shot) sampling: request all total_c columns at once."""
    if total_c < 1:
        raise ValueError("total_c must be positive")
    return sampler.sample(as_matrix(a), k, total_c, rng)


@dataclass(frozen=True)
class BoostConfig:
    """Repeat the adaptive run ceil(log2(1/delta)) times and keep the best."""

    delta: float
    repeats: int = field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        object.__setattr__(self, "repeats", max(1, math.ceil(math.log2(1.0 / self.delta))))


def boost_best_of(a, cfg: AdaptiveConfig, boost: BoostConfig, rng: RngStream):
    """Run the adaptive driver `boost.repeats` times on derived sub-streams
    and return the run minimizing ||a - (C C+ a)_{tk}||_F."""
    arr = as_matrix(a)
    best = None
    best_err = math.inf
    for repeat in range(boost.repeats):
        selected, traces = _run_rounds(arr, cfg, rng.child("repeat", repeat))
        c_mat = arr[:, selected.as_array()]
        err = math.sqrt(
            fro_norm_sq(arr - rank_k_column_projection(arr, c_mat, cfg.t * cfg.k))
        )
        if err < best_err:
            best, best_err = (selected, traces), err
    return best


def theorem1_bound(sigma, k: int, t: int, epsilon: float) -> float:
    """Expected squared-error bound for t rounds of truncated-residual
    adaptive sampling with a (1 + epsilon) relative-error sampler:

        (1+eps) ||a - a_tk||_F^2
            + eps * sum_{i=1}^{t-1} (1+eps)^(t-i) ||a - a_ik||_F^2

    in squared-norm units, evaluated from the spectrum of `a`.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if k < 1 or t < 1:
        raise ValueError("k and t must be positive")
    s = np.asarray(sigma, dtype=float)
    if t * k > s.size:
        raise ValueError(f"t*k = {t * k} exceeds the spectrum length {s.size}")
    total = (1.0 + epsilon) * frobenius_tail(s, t * k)
    for i in range(1, t):
        total += epsilon * (1.0 + epsilon) ** (t - i) * frobenius_tail(s, i * k)
    return float(total)
