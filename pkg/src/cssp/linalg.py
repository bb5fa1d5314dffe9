"""Dense-matrix primitives: SVD, truncation, pseudoinverse, and the
rank-constrained column-space projection that all samplers and drivers share.

Conventions
-----------
Matrices are 2-D float64 ndarrays.  Norms are accumulated squared and only
rooted at reporting boundaries, so "tail" helpers return squared quantities.
The numerical rank cutoff is ``sigma_i > rank_tol * sigma_1`` with
``rank_tol = 1e-12`` by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Default relative cutoff for the numerical rank.
RANK_TOL = 1e-12


def as_matrix(a, *, allow_nan: bool = False, name: str = "matrix") -> np.ndarray:
    """Validate and return `a` as a 2-D float64 array with m, n >= 1.

    Entries must be finite unless `allow_nan`, in which case NaN marks a
    missing value (infinities are never allowed).
    """
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column, got {arr.shape}")
    if allow_nan:
        if np.isinf(arr).any():
            raise ValueError(f"{name} contains infinite entries")
    elif not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def fro_norm_sq(a) -> float:
    """Squared Frobenius norm, the sum of squared entries."""
    arr = np.asarray(a, dtype=float)
    return float(np.einsum("ij,ij->", arr, arr)) if arr.ndim == 2 else float(arr @ arr)


@dataclass(frozen=True)
class SvdFactors:
    """Economy SVD truncated at the numerical rank.

    `u` is m x rank and `v` is n x rank, both column-orthonormal; `sigma`
    holds the rank retained singular values in non-increasing order.  A rank
    of zero (all-zero input) yields empty factors.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    rank: int

    def truncated(self, k: int) -> np.ndarray:
        """Reconstruction from the top min(k, rank) singular triplets."""
        if k < 0:
            raise ValueError("k must be non-negative")
        j = min(k, self.rank)
        return (self.u[:, :j] * self.sigma[:j]) @ self.v[:, :j].T

    def reconstruct(self) -> np.ndarray:
        return self.truncated(self.rank)


def svd(a, rank_tol: float = RANK_TOL) -> SvdFactors:
    """Economy SVD of `a` with singular values below ``rank_tol * sigma_1``
    dropped.

    Raises `numpy.linalg.LinAlgError` if the factorization fails to
    converge; the result is never silently inaccurate.
    """
    arr = as_matrix(a)
    u, sigma, vt = np.linalg.svd(arr, full_matrices=False)
    if sigma.size == 0 or sigma[0] <= 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(sigma > rank_tol * sigma[0]))
    return SvdFactors(u=u[:, :rank], sigma=sigma[:rank], v=vt[:rank].T, rank=rank)


def best_rank_k(a, k: int, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Best rank-k approximation A_k (full reconstruction when k >= rank)."""
    if k < 1:
        raise ValueError("k must be positive")
    return svd(a, rank_tol).truncated(k)


def pseudoinverse(a, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse via the rank-truncated SVD."""
    f = svd(a, rank_tol)
    if f.rank == 0:
        return np.zeros((np.shape(a)[1], np.shape(a)[0]))
    return (f.v / f.sigma) @ f.u.T


def orthonormal_basis(c, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Column-orthonormal basis Q of range(c), rank-revealing.

    Rank-deficient input is legal: the basis simply has fewer columns.  An
    all-zero matrix yields an m x 0 basis.
    """
    f = svd(c, rank_tol)
    return f.u


def frobenius_tail(sigma, k: int) -> float:
    """Sum of squared singular values beyond index k (zero when k >= len)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    s = np.asarray(sigma, dtype=float)
    return float(np.sum(s[k:] ** 2))


def rank_k_column_projection(a, c, k: int, rank_tol: float = RANK_TOL) -> np.ndarray:
    """(C C+ A)_k: the best rank-k approximation of `a` within span(c).

    Computed as Q (Q^T a)_k where Q is an orthonormal basis of range(c);
    this is the minimizer of ||a - c Psi||_F over all rank-<=k Psi.  When
    k exceeds rank(c) the truncation is vacuous and the full projection
    C C+ a is returned.  A rank-zero `c` projects onto the trivial space,
    giving the zero matrix.
    """
    arr = as_matrix(a)
    if k < 1:
        raise ValueError("k must be positive")
    if np.shape(c)[0] != arr.shape[0]:
        raise ValueError("a and c must have the same number of rows")
    q = orthonormal_basis(c, rank_tol)
    if q.shape[1] == 0:
        return np.zeros_like(arr)
    m = q.T @ arr
    return q @ svd(m, rank_tol).truncated(k)


def projection_error_profile(a, c, ks, rank_tol: float = RANK_TOL):
    """Squared errors ||a - (C C+ a)_j||_F^2 for several truncation ranks j,
    sharing a single factorization of the projected matrix.

    Returns ``(full_sq, by_rank)`` where `full_sq` is the untruncated
    projection error ||a - C C+ a||_F^2 and `by_rank` maps each j in `ks`
    to its truncated error (matrix-Pythagoras: full_sq plus the spectral
    tail of Q^T a beyond j).
    """
    arr = as_matrix(a)
    q = orthonormal_basis(c, rank_tol)
    norm_sq = fro_norm_sq(arr)
    if q.shape[1] == 0:
        return norm_sq, {int(j): norm_sq for j in ks}
    mid = q.T @ arr
    sigma = np.linalg.svd(mid, compute_uv=False)
    full_sq = max(norm_sq - float(np.sum(sigma**2)), 0.0)
    return full_sq, {int(j): full_sq + frobenius_tail(sigma, int(j)) for j in ks}


def relative_error_ratio(a, c, k: int, rank_tol: float = RANK_TOL) -> float:
    """||a - (CC+a)_k||_F / ||a - a_k||_F, the reported quality metric.

    Always >= 1 up to roundoff (Eckart-Young).  Requires rank(a) > k so the
    denominator is nonzero.
    """
    arr = as_matrix(a)
    f = svd(arr, rank_tol)
    den_sq = frobenius_tail(f.sigma, k)
    if f.rank <= k or den_sq <= 0.0:
        raise ValueError(
            f"exact-rank denominator: rank(a)={f.rank} <= k={k}, ||a - a_k|| is zero"
        )
    num_sq = fro_norm_sq(arr - rank_k_column_projection(arr, c, k, rank_tol))
    return float(np.sqrt(num_sq / den_sq))


@dataclass(frozen=True)
class ColumnSet:
    """Ordered selected column indices with the round each was chosen in.

    Indices are distinct and non-negative; `round_of` is non-decreasing
    along the list (columns are only ever appended by later rounds).
    """

    indices: tuple[int, ...]
    round_of: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.round_of):
            raise ValueError("indices and round_of must have equal length")
        if any(i < 0 for i in self.indices):
            raise ValueError("column indices must be non-negative")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("column indices must be distinct")
        if any(r < 1 for r in self.round_of):
            raise ValueError("rounds are 1-based")
        if any(a > b for a, b in zip(self.round_of, self.round_of[1:])):
            raise ValueError("round_of must be non-decreasing")

    @classmethod
    def empty(cls) -> "ColumnSet":
        return cls(indices=(), round_of=())

    @classmethod
    def single_round(cls, indices, round: int = 1) -> "ColumnSet":
        idx = tuple(int(i) for i in indices)
        return cls(indices=idx, round_of=(round,) * len(idx))

    def extended(self, new_indices, round: int) -> "ColumnSet":
        """Append `new_indices` (must be fresh) as members of `round`."""
        new = tuple(int(i) for i in new_indices)
        return ColumnSet(
            indices=self.indices + new,
            round_of=self.round_of + (round,) * len(new),
        )

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=int)

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, index: int) -> bool:
        return index in set(self.indices)
