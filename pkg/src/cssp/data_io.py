"""Synthetic matrix generation, CSV/binary matrix I/O, and ternary
missing-value preprocessing.

CSV files are RFC-4180-style numeric tables with an optional header row;
empty cells and "NA" are read as NaN, the missing-value sentinel.  The
binary format is the magic ``CSSPMAT1`` followed by little-endian uint64
row/column counts and the row-major float64 payload.
"""

from __future__ import annotations

import csv
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import as_matrix
from .rng import RngStream

_MAGIC = b"CSSPMAT1"
_MISSING_TOKENS = {"", "na", "nan"}


class CsvParseError(ValueError):
    """CSV cell or structure that cannot be parsed as a numeric matrix."""


@dataclass(frozen=True)
class PowerLaw:
    """sigma_i = i ** -exponent, i starting at 1."""

    exponent: float = 0.3

    def __post_init__(self) -> None:
        if self.exponent <= 0.0:
            raise ValueError("exponent must be positive")

    def values(self, count: int) -> np.ndarray:
        return np.arange(1, count + 1, dtype=float) ** -self.exponent


@dataclass(frozen=True)
class Exponential:
    """sigma_i = exp(-rate * (i - 1)), i starting at 1."""

    rate: float = 0.1

    def __post_init__(self) -> None:
        if self.rate <= 0.0:
            raise ValueError("rate must be positive")

    def values(self, count: int) -> np.ndarray:
        return np.exp(-self.rate * np.arange(count, dtype=float))


@dataclass(frozen=True)
class ExplicitSpectrum:
    """A literal list of singular values, non-increasing and positive."""

    sigma: tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(s) for s in self.sigma)
        if len(values) == 0:
            raise ValueError("explicit spectrum must not be empty")
        if any(s <= 0.0 for s in values):
            raise ValueError("explicit singular values must be positive")
        if any(a < b for a, b in zip(values, values[1:])):
            raise ValueError("explicit singular values must be non-increasing")
        object.__setattr__(self, "sigma", values)

    def values(self, count: int) -> np.ndarray:
        if len(self.sigma) > count:
            raise ValueError(
                f"explicit spectrum has {len(self.sigma)} values but only "
                f"{count} fit in the requested shape"
            )
        return np.asarray(self.sigma, dtype=float)


Spectrum = PowerLaw | Exponential | ExplicitSpectrum


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape, spectrum, and seed of a synthetic test matrix."""

    m: int
    n: int
    spectrum: Spectrum
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ValueError("matrix dimensions must be positive")


def generate_synthetic(spec: SyntheticSpec) -> np.ndarray:
    """Seeded m x n matrix with the prescribed singular values.

    The orthonormal factors are QR factors of seeded standard-Gaussian
    matrices, so the output's spectrum matches the requested one to
    rounding error.  An explicit spectrum shorter than min(m, n) yields a
    correspondingly rank-deficient matrix.
    """
    sigma = spec.spectrum.values(min(spec.m, spec.n))
    p = len(sigma)
    gen = RngStream(spec.seed).child("synthetic").generator()
    qu, _ = np.linalg.qr(gen.standard_normal((spec.m, p)))
    qv, _ = np.linalg.qr(gen.standard_normal((spec.n, p)))
    return (qu * sigma) @ qv.T


def _parse_cell(token: str, row: int, col: int) -> float:
    text = token.strip()
    if text.lower() in _MISSING_TOKENS:
        return float("nan")
    try:
        value = float(text)
    except ValueError:
        raise CsvParseError(
            f"non-numeric cell {token!r} at row {row}, column {col}"
        ) from None
    if np.isinf(value):
        raise CsvParseError(f"infinite value at row {row}, column {col}")
    return value


def _looks_like_header(tokens: list[str]) -> bool:
    for token in tokens:
        text = token.strip()
        if text.lower() in _MISSING_TOKENS:
            continue
        try:
            float(text)
        except ValueError:
            return True
    return False


def load_csv(path) -> np.ndarray:
    """Load a numeric CSV as a matrix; header rows are auto-detected.

    Empty cells and "NA" become NaN.  Ragged rows and non-numeric cells
    raise :class:`CsvParseError` naming the offending location.
    """
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        rows: list[list[str]] = [row for row in reader if row]
    if not rows:
        raise CsvParseError(f"{path}: empty file")
    start = 1 if _looks_like_header(rows[0]) else 0
    if start == len(rows):
        raise CsvParseError(f"{path}: header row but no data")
    width = len(rows[start])
    data = np.empty((len(rows) - start, width))
    for i, row in enumerate(rows[start:], start=start):
        if len(row) != width:
            raise CsvParseError(
                f"{path}: ragged row {i + 1} has {len(row)} cells, expected {width}"
            )
        data[i - start] = [_parse_cell(tok, i + 1, j + 1) for j, tok in enumerate(row)]
    return data


def save_csv(a, path) -> None:
    """Write a matrix as CSV with 17 significant digits (exact round-trip);
    NaN entries are written as "NA"."""
    arr = as_matrix(a, allow_nan=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        for row in arr:
            writer.writerow("NA" if np.isnan(x) else f"{x:.17g}" for x in row)


def load_binary(path) -> np.ndarray:
    """Load a matrix from the CSSPMAT1 binary format (bit-exact)."""
    raw = Path(path).read_bytes()
    if len(raw) < len(_MAGIC) + 16 or raw[: len(_MAGIC)] != _MAGIC:
        raise ValueError(f"{path}: not a CSSPMAT1 matrix file")
    m, n = struct.unpack_from("<QQ", raw, len(_MAGIC))
    payload = raw[len(_MAGIC) + 16 :]
    if len(payload) != m * n * 8:
        raise ValueError(f"{path}: truncated payload, expected {m}x{n} doubles")
    return np.frombuffer(payload, dtype="<f8").reshape(int(m), int(n)).copy()


def save_binary(a, path) -> None:
    """Write a matrix in the CSSPMAT1 binary format (bit-exact)."""
    arr = as_matrix(a, allow_nan=True)
    with open(path, "wb") as handle:
        handle.write(_MAGIC)
        handle.write(struct.pack("<QQ", arr.shape[0], arr.shape[1]))
        handle.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_matrix(path) -> np.ndarray:
    """Load a matrix, dispatching on extension (.csv or binary)."""
    if str(path).lower().endswith(".csv"):
        return load_csv(path)
    return load_binary(path)


def save_matrix(a, path) -> None:
    """Save a matrix, dispatching on extension (.csv or binary)."""
    if str(path).lower().endswith(".csv"):
        save_csv(a, path)
    else:
        save_binary(a, path)


def fill_missing_ternary(a, rng: RngStream) -> np.ndarray:
    """Replace NaN cells with -1, 0, or +1 drawn uniformly i.i.d.

    Intended for ternary (SNP-style) matrices; non-missing entries outside
    {-1, 0, +1} trigger a warning but are left untouched.
    """
    arr = as_matrix(a, allow_nan=True).copy()
    missing = np.isnan(arr)
    present = arr[~missing]
    bad = np.count_nonzero(~np.isin(present, (-1.0, 0.0, 1.0)))
    if bad:
        warnings.warn(
            f"{bad} non-missing entries are outside {{-1, 0, +1}}",
            RuntimeWarning,
            stacklevel=2,
        )
    count = int(missing.sum())
    if count:
        arr[missing] = rng.generator().integers(-1, 2, size=count).astype(float)
    return arr
