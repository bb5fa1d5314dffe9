"""Brute-force references for tests and the `oracle` CLI subcommand.

Deliberately simple and slow: the exhaustive search enumerates every
column subset, and the spectral check compares full spectra directly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, fro_norm_sq, rank_k_column_projection, svd
from .rng import RngStream

#: Largest number of subsets the exhaustive search will enumerate.
MAX_SUBSETS = 10**6


@dataclass(frozen=True)
class SubsetSearchResult:
    """Best c-subset found by exhaustive enumeration."""

    indices: tuple[int, ...]
    error: float
    examined: int


def exhaustive_best_subset(a, c: int, k: int, max_subsets: int = MAX_SUBSETS) -> SubsetSearchResult:
    """Enumerate all c-subsets of columns and return the one minimizing
    ||a - (C C+ a)_k||_F.

    Ties break toward the lexicographically first subset (the enumeration
    order).  Guarded: raises if C(n, c) exceeds `max_subsets`.
    """
    arr = as_matrix(a)
    n = arr.shape[1]
    if not 1 <= c <= n:
        raise ValueError(f"need 1 <= c <= n, got c={c}, n={n}")
    total = math.comb(n, c)
    if total > max_subsets:
        raise ValueError(f"C({n},{c}) = {total} exceeds the {max_subsets} subset guard")

    best_indices: tuple[int, ...] = ()
    best_error = math.inf
    for subset in itertools.combinations(range(n), c):
        err = math.sqrt(
            fro_norm_sq(arr - rank_k_column_projection(arr, arr[:, list(subset)], k))
        )
        if err < best_error:
            best_indices, best_error = subset, err
    return SubsetSearchResult(indices=best_indices, error=best_error, examined=total)


def lemma1_check(x, y_rank: int, rng: RngStream, tol: float = 1e-8) -> bool:
    """Check sigma_i(X - Y) >= sigma_{r+i}(X) for a random rank-r Y.

    Y is the product of seeded Gaussian factors of inner dimension
    `y_rank` (zero means Y = 0 and the comparison is an identity).  True
    iff the inequality holds for every valid i within `tol`.
    """
    arr = as_matrix(x)
    if y_rank < 0 or y_rank >= min(arr.shape):
        raise ValueError(f"y_rank must lie in [0, {min(arr.shape)})")
    if y_rank == 0:
        y = np.zeros_like(arr)
    else:
        gen = rng.generator()
        y = gen.standard_normal((arr.shape[0], y_rank)) @ gen.standard_normal(
            (y_rank, arr.shape[1])
        )
    sig_x = np.linalg.svd(arr, compute_uv=False)
    sig_diff = np.linalg.svd(arr - y, compute_uv=False)
    shifted = sig_x[y_rank:]
    return bool(np.all(sig_diff[: len(shifted)] >= shifted - tol))


def random_rank_k_candidates(shape: tuple[int, int], k: int, count: int, rng: RngStream):
    """Yield `count` random rank-<=k matrices of the given shape, for
    checking projection optimality against arbitrary rank-k competitors."""
    rows, cols = shape
    gen = rng.generator()
    for _ in range(count):
        yield gen.standard_normal((rows, k)) @ gen.standard_normal((k, cols))


def svd_self_check(a, rank_tol: float = 1e-12) -> dict:
    """Numerical health report of the SVD contract on `a` (used by the
    oracle CLI): orthonormality and reconstruction residuals."""
    arr = as_matrix(a)
    f = svd(arr, rank_tol)
    eye = np.eye(f.rank)
    return {
        "rank": f.rank,
        "u_orthonormality": float(np.abs(f.u.T @ f.u - eye).max()) if f.rank else 0.0,
        "v_orthonormality": float(np.abs(f.v.T @ f.v - eye).max()) if f.rank else 0.0,
        "relative_reconstruction_error": float(
            math.sqrt(fro_norm_sq(arr - f.reconstruct()) / max(fro_norm_sq(arr), 1e-300))
        ),
    }
