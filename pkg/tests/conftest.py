import numpy as np
import pytest


def gaussian(m: int, n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((m, n))


def matrix_with_spectrum(m: int, n: int, sigma, seed: int) -> np.ndarray:
    """Independent construction of a matrix with prescribed singular values
    (QR factors of Gaussians), used as a test oracle for spectra."""
    sigma = np.asarray(sigma, dtype=float)
    gen = np.random.default_rng(seed)
    qu, _ = np.linalg.qr(gen.standard_normal((m, len(sigma))))
    qv, _ = np.linalg.qr(gen.standard_normal((n, len(sigma))))
    return (qu * sigma) @ qv.T


@pytest.fixture
def rng_factory():
    from cssp.rng import RngStream

    return lambda seed=0, *labels: RngStream(seed).child(*labels) if labels else RngStream(seed)
