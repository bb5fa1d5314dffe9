"""Column subset selection algorithms.

Four samplers share the interface ``(a, k, c, rng) -> ColumnSet``:

* additive-error sampling by squared column norms,
* leverage-score sampling from the top-k right singular subspace,
* deterministic dual-set spectral-Frobenius sparsification,
* the near-optimal two-stage algorithm (deterministic dual-set stage
  followed by additive-error sampling from the residual).

All randomized samplers draw indices i.i.d. and collapse duplicate draws to
distinct indices, since a repeated column adds nothing to the span; the
number of distinct columns returned may therefore be below the request.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .linalg import RANK_TOL, ColumnSet, as_matrix, fro_norm_sq, svd
from .rng import RngStream

#: Relative feasibility-margin width within which dual-set candidates are
#: treated as tied and the max-norm tie-break applies.
_TIE_TOL = 1e-12

#: Residuals below this relative size are treated as exactly captured.
_ZERO_RESIDUAL_TOL = 1e-12


class SamplerKind(str, Enum):
    ADDITIVE_ERROR = "additive-error"
    LEVERAGE_SCORE = "leverage-score"
    DUAL_SET = "dual-set"
    NEAR_OPTIMAL = "near-optimal"


@dataclass(frozen=True)
class SamplerSpec:
    """Which selection algorithm to run, with its kind-specific parameters.

    `stage_split` overrides the near-optimal deterministic stage size r
    (must satisfy k < r < c); leave None for the default split.
    """

    kind: SamplerKind
    stage_split: int | None = None

    def __post_init__(self) -> None:
        kind = SamplerKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.stage_split is not None:
            if kind is not SamplerKind.NEAR_OPTIMAL:
                raise ValueError("stage_split only applies to the near-optimal sampler")
            if self.stage_split < 2:
                raise ValueError("stage_split must be at least 2")

    def sample(self, a, k: int, c: int, rng: RngStream) -> ColumnSet:
        """Select up to c columns of `a` (k is ignored by additive-error)."""
        if self.kind is SamplerKind.ADDITIVE_ERROR:
            return additive_error_sample(a, c, rng)
        if self.kind is SamplerKind.LEVERAGE_SCORE:
            return leverage_score_sample(a, k, c, rng)
        if self.kind is SamplerKind.DUAL_SET:
            return dual_set_select(a, k, c)
        return near_optimal_select(a, k, c, rng, stage_split=self.stage_split)


def _draw_distinct(p: np.ndarray, c: int, rng: RngStream) -> list[int]:
    # c i.i.d. draws from p, duplicates collapsed preserving draw order.
    # Requests covering every drawable column short-cut to full selection
    # (i.i.d. draws alone would leave coupon-collector gaps).
    drawable = np.flatnonzero(p > 0.0)
    if c >= drawable.size:
        return [int(i) for i in drawable]
    draws = rng.generator().choice(len(p), size=c, p=p)
    return list(dict.fromkeys(int(i) for i in draws))


def column_norm_distribution(a) -> np.ndarray:
    """Sampling distribution p_i = ||a_i||^2 / ||a||_F^2 over columns."""
    arr = as_matrix(a)
    sq = np.einsum("ij,ij->j", arr, arr)
    total = sq.sum()
    if total <= 0.0:
        raise ValueError("degenerate distribution: matrix has no nonzero column")
    return sq / total


def additive_error_sample(a, c: int, rng: RngStream) -> ColumnSet:
    """Draw c columns i.i.d. proportionally to their squared norms."""
    if c < 1:
        raise ValueError("c must be positive")
    p = column_norm_distribution(a)
    return ColumnSet.single_round(_draw_distinct(p, c, rng))


def leverage_distribution(a, k: int, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Leverage-score distribution over columns: squared row norms of V_k.

    Row norms of V_k sum to k, so the scores are normalized by k to form a
    distribution.  When the spectrum is degenerate at the k-th value the
    top-k subspace (and hence the scores) follows the computed SVD.
    """
    f = svd(a, rank_tol)
    if k < 1:
        raise ValueError("k must be positive")
    if k >= f.rank:
        raise ValueError(f"k={k} must be below rank(a)={f.rank}")
    vk = f.v[:, :k]
    p = np.einsum("ij,ij->i", vk, vk)
    return p / p.sum()


def leverage_score_sample(a, k: int, c: int, rng: RngStream) -> ColumnSet:
    """Draw c columns i.i.d. from the rank-k leverage-score distribution."""
    if c < 1:
        raise ValueError("c must be positive")
    p = leverage_distribution(a, k)
    return ColumnSet.single_round(_draw_distinct(p, c, rng))


@dataclass(frozen=True)
class DualSetState:
    """Snapshot of the dual-set barrier after step tau.

    `gram` is the running k x k accumulator, `barrier` the lower shift
    L_tau it must stay strictly above, and `weights` the raw (unscaled)
    weights accumulated so far, at most tau of them nonzero.
    """

    tau: int
    barrier: float
    gram: np.ndarray
    weights: np.ndarray


def dual_set_sparsify(v, x, r: int, return_states: bool = False):
    """Deterministic dual-set spectral-Frobenius sparsification.

    Given V (n x k, column-orthonormal, rows v_i) forming a decomposition of
    the identity and X (n x ell, rows x_i), computes weights s_i >= 0 with at
    most r nonzero such that the sampling matrix S built from the weights
    satisfies both

        sigma_k(V^T S) >= 1 - sqrt(k/r)   and   ||X^T S||_F <= ||X||_F.

    Parameters
    ----------
    v : (n, k) array with v.T @ v = I_k, k < r.
    x : (n, ell) array; ell may be zero.
    r : number of selection steps, k < r < n.
    return_states : also return the per-step barrier snapshots.

    Returns
    -------
    weights : (n,) array, or (weights, states) if `return_states`.

    Notes
    -----
    Each step picks the feasible index with the largest feasibility margin
    (upper bound minus lower bound on 1/t); exact ties are broken in favor
    of a not-already-selected column of maximum norm.  The weight t is the
    midpoint of the feasible interval.  The raw weights are scaled by
    (1 - sqrt(k/r)) / r at the end, which is what makes both guarantees
    above hold simultaneously.
    """
    vmat = as_matrix(v, name="v")
    n, k = vmat.shape
    if not (0 < k < r < n):
        raise ValueError(f"need 0 < k < r < n, got k={k}, r={r}, n={n}")
    if fro_norm_sq(vmat.T @ vmat - np.eye(k)) > 1e-16 * n:
        raise ValueError("rows of v must form a decomposition of the identity")
    xmat = np.asarray(x, dtype=float)
    if xmat.ndim != 2 or xmat.shape[0] != n:
        raise ValueError("x must have one row per row of v")

    x_sq = np.einsum("ij,ij->i", xmat, xmat) if xmat.size else np.zeros(n)
    x_total = float(x_sq.sum())
    # Upper potential per index; vacuous when X is zero (or empty).
    upper = (1.0 - np.sqrt(k / r)) * x_sq / x_total if x_total > 0.0 else np.zeros(n)

    weights = np.zeros(n)
    gram = np.zeros((k, k))
    states: list[DualSetState] = []
    for tau in range(r):
        shift = tau - np.sqrt(r * k)
        shifted = shift + 1.0
        lam, w = np.linalg.eigh(gram)
        if lam[0] <= shifted:
            raise RuntimeError(
                "dual-set barrier violated: lambda_min(B) <= L+1 at step "
                f"{tau}; this indicates a bug, not a recoverable state"
            )
        proj = vmat @ w
        inv1 = 1.0 / (lam - shifted)
        phi_gap = inv1.sum() - float((1.0 / (lam - shift)).sum())
        lower = (proj**2 * inv1**2).sum(axis=1) / phi_gap - (proj**2 * inv1).sum(axis=1)

        margin = lower - upper
        feasible = np.flatnonzero((margin >= 0.0) & (lower > 0.0))
        if feasible.size == 0:
            raise RuntimeError(
                f"dual-set step {tau} found no feasible index; this indicates "
                "a bug, not a recoverable state"
            )
        best = margin[feasible].max()
        ties = feasible[margin[feasible] >= best - _TIE_TOL * max(abs(best), 1.0)]
        if ties.size > 1:
            fresh = ties[weights[ties] == 0.0]
            pool = fresh if fresh.size else ties
            pick = int(pool[np.argmax(x_sq[pool])])
        else:
            pick = int(ties[0])

        t = 2.0 / (upper[pick] + lower[pick])
        gram = gram + t * np.outer(vmat[pick], vmat[pick])
        weights[pick] += t
        if return_states:
            states.append(
                DualSetState(tau=tau, barrier=shift, gram=gram.copy(), weights=weights.copy())
            )

    weights *= (1.0 - np.sqrt(k / r)) / r
    return (weights, states) if return_states else weights


def sampling_matrix(weights, r: int) -> np.ndarray:
    """The n x r sampling/rescaling matrix S built from dual-set weights.

    Column j carries sqrt(s_i) for the j-th nonzero weight; trailing
    columns are zero when fewer than r weights are nonzero.
    """
    w = np.asarray(weights, dtype=float)
    nonzero = np.flatnonzero(w > 0.0)
    if nonzero.size > r:
        raise ValueError(f"more than r={r} nonzero weights")
    s = np.zeros((len(w), r))
    for j, i in enumerate(nonzero):
        s[i, j] = np.sqrt(w[i])
    return s


def dual_set_select(a, k: int, r: int, rank_tol: float = RANK_TOL) -> ColumnSet:
    """Deterministic CSSP selection: dual-set sparsification of (V_k, residual).

    Selects the (at most r) columns receiving nonzero weight.  The weights
    themselves only matter for the lemma guarantees; the projection
    C C+ a is invariant to rescaling each selected column.
    """
    arr = as_matrix(a)
    f = svd(arr, rank_tol)
    if not 1 <= k <= f.rank:
        raise ValueError(f"need 1 <= k <= rank(a)={f.rank}, got k={k}")
    x = f.v[:, k:] * f.sigma[k:]
    weights = dual_set_sparsify(f.v[:, :k], x, r)
    return ColumnSet.single_round(np.flatnonzero(weights > 0.0))


def default_stage_split(k: int, c: int) -> int:
    """Deterministic stage size r for near-optimal selection.

    Targets r = min(2k, c - k) but clamps to r >= k + 1 so the dual-set
    stage stays within its k < r requirement (at c = 2k the unclamped
    formula would collapse to r = k).
    """
    return max(k + 1, min(2 * k, c - k))


def near_optimal_select(
    a, k: int, c: int, rng: RngStream, stage_split: int | None = None
) -> ColumnSet:
    """Near-optimal two-stage column selection.

    Stage 1 deterministically picks r columns by dual-set sparsification of
    the top-k right singular subspace against the rank-k residual; stage 2
    draws the remaining c - r columns by additive-error sampling from
    b = a - C1 C1+ a.  Stage-2 draws land on columns not yet captured (a
    selected column has zero residual norm), and the union has at most c
    distinct indices.

    A residual that is already (numerically) zero after stage 1 short-cuts
    to the stage-1 columns with a warning.
    """
    arr = as_matrix(a)
    n = arr.shape[1]
    f = svd(arr)
    if not 1 <= k <= f.rank:
        raise ValueError(f"need 1 <= k <= rank(a)={f.rank}, got k={k}")
    if c <= k:
        raise ValueError(f"need c > k, got c={c}, k={k}")
    r = default_stage_split(k, c) if stage_split is None else stage_split
    if c - r <= 0:
        raise ValueError(f"no columns left for stage 2: c={c}, stage split r={r}")
    if not k < r < n:
        raise ValueError(f"stage split must satisfy k < r < n, got r={r}")

    x = f.v[:, k:] * f.sigma[k:]
    weights = dual_set_sparsify(f.v[:, :k], x, r)
    stage1 = np.flatnonzero(weights > 0.0)

    q = svd(arr[:, stage1]).u
    b = arr - q @ (q.T @ arr)
    if fro_norm_sq(b) <= (_ZERO_RESIDUAL_TOL**2) * fro_norm_sq(arr):
        warnings.warn(
            "stage-2 residual is zero; returning stage-1 columns only",
            RuntimeWarning,
            stacklevel=2,
        )
        return ColumnSet.single_round(stage1)

    stage2 = additive_error_sample(b, c - r, rng)
    chosen = list(stage1)
    chosen.extend(i for i in stage2.indices if i not in set(stage1))
    return ColumnSet.single_round(chosen)
