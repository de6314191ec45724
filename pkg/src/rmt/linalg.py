"""Dense complex-matrix substrate: Hermitian eigendecompositions, sample
covariances, seeded complex Gaussian draws and matrix file round-trips.

Matrices are plain ``numpy.ndarray`` objects of dtype complex128; this module
only adds the validation, conventions (ascending eigenvalues, unit-variance
proper Gaussians) and reproducible stream handling the estimators rely on.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError

__all__ = [
    "RngStream",
    "HermitianEigen",
    "hermitian_eig",
    "sample_covariance",
    "complex_gaussian",
    "haar_unitary",
    "save_matrix_csv",
    "load_matrix_csv",
    "save_matrix_bin",
    "load_matrix_bin",
]

HERMITICITY_RTOL = 1e-12


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by (seed, stream).

    Philox streams with distinct keys are independent, so one ``RngStream``
    per Monte-Carlo trial gives reproducible, order-free parallelism.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= self.seed < 2**64 and 0 <= self.stream < 2**64):
            raise ParameterError("seed and stream must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=[self.seed, self.stream]))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise ParameterError(f"expected RngStream or numpy Generator, got {type(rng)!r}")


@dataclass(frozen=True)
class HermitianEigen:
    """Eigendecomposition of a Hermitian matrix.

    ``eigenvalues`` are real and ascending; column i of ``eigenvectors`` pairs
    with ``eigenvalues[i]`` and the columns are orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def descending(self) -> "HermitianEigen":
        """View with eigenvalues sorted descending (columns reordered to match)."""
        return HermitianEigen(self.eigenvalues[::-1].copy(), self.eigenvectors[:, ::-1].copy())

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def _check_square_hermitian(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale > 0 and np.max(np.abs(a - a.conj().T)) > HERMITICITY_RTOL * scale:
        raise DimensionError("matrix is not Hermitian within 1e-12 relative tolerance")
    return a


def hermitian_eig(a) -> HermitianEigen:
    """Eigendecompose a Hermitian matrix, eigenvalues ascending.

    Raises :class:`DimensionError` on non-square or non-Hermitian input.
    """
    a = _check_square_hermitian(a)
    w, v = np.linalg.eigh(a)
    return HermitianEigen(w, v)


def sample_covariance(y) -> np.ndarray:
    """Sample covariance (1/n) Y Y^H of n column observations."""
    y = np.asarray(y, dtype=complex)
    if y.ndim != 2 or y.shape[0] == 0 or y.shape[1] == 0:
        raise DimensionError(f"expected a nonempty N x n matrix, got shape {y.shape}")
    n = y.shape[1]
    c = y @ y.conj().T / n
    # exact Hermitian symmetry keeps eigh deterministic across BLAS paths
    return (c + c.conj().T) / 2


def complex_gaussian(n_rows: int, n_cols: int, rng) -> np.ndarray:
    """Proper complex Gaussian matrix: zero mean, E|x|^2 = 1 per entry.

    Real and imaginary parts are independent N(0, 1/2).
    """
    if n_rows < 1 or n_cols < 1:
        raise ParameterError("matrix dimensions must be >= 1")
    g = _as_generator(rng)
    re = g.standard_normal((n_rows, n_cols))
    im = g.standard_normal((n_rows, n_cols))
    return (re + 1j * im) * np.sqrt(0.5)


def haar_unitary(n: int, rng) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian, phase-fixed."""
    g = _as_generator(rng)
    q, r = np.linalg.qr(complex_gaussian(n, n, g))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


# --- file round-trips -------------------------------------------------------
#
# CSV: header re_0,im_0,...,re_{c-1},im_{c-1}; one matrix row per line.
# Binary: little-endian int64 dims header then row-major interleaved
# (re, im) float64 pairs.

_BIN_MAGIC = b"RMTM"


def save_matrix_csv(path, a) -> None:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise DimensionError("only 2-d matrices are supported")
    header = ",".join(f"re_{j},im_{j}" for j in range(a.shape[1]))
    flat = np.empty((a.shape[0], 2 * a.shape[1]))
    flat[:, 0::2] = a.real
    flat[:, 1::2] = a.imag
    np.savetxt(path, flat, delimiter=",", header=header, comments="")


def load_matrix_csv(path) -> np.ndarray:
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if raw.shape[1] % 2 != 0:
        raise DimensionError("matrix CSV must hold re/im column pairs")
    return raw[:, 0::2] + 1j * raw[:, 1::2]


def save_matrix_bin(path, a) -> None:
    a = np.ascontiguousarray(np.asarray(a, dtype=complex))
    if a.ndim != 2:
        raise DimensionError("only 2-d matrices are supported")
    with open(path, "wb") as fh:
        fh.write(_BIN_MAGIC)
        fh.write(struct.pack("<qq", a.shape[0], a.shape[1]))
        interleaved = np.empty(a.size * 2)
        interleaved[0::2] = a.real.ravel()
        interleaved[1::2] = a.imag.ravel()
        fh.write(interleaved.astype("<f8").tobytes())


def load_matrix_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _BIN_MAGIC:
            raise ParameterError("not a matrix binary file (bad magic)")
        rows, cols = struct.unpack("<qq", fh.read(16))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != 2 * rows * cols:
        raise DimensionError("binary payload does not match dims header")
    return (data[0::2] + 1j * data[1::2]).reshape(rows, cols)
