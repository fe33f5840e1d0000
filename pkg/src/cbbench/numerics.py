"""Seeded randomness and the small linear-algebra kernel used everywhere else.

Matrices are plain 2-D float64 numpy arrays with row-major semantics. All
functions are pure: identical inputs (including generator state) produce
bit-identical outputs on every platform, which is the backbone of the
key-based renewability and replay guarantees of the rest of the toolkit.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError, NumericError

__all__ = [
    "RandomStream",
    "derive_stream",
    "gaussian_matrix",
    "gram_schmidt",
    "PcaModel",
    "pca_fit",
    "pca_transform",
    "covariance",
    "default_ridge",
    "gaussian_entropy",
]

_U64_MAX = np.iinfo(np.uint64).max

# 0.5 * ln(2*pi*e), the differential entropy of a unit-variance Gaussian
_HALF_LN_2PI_E = 0.5 * (math.log(2.0 * math.pi) + 1.0)


def _philox_key(seed: int, label: bytes) -> int:
    """128-bit Philox key from a 64-bit seed and a domain-separation label."""
    material = int(seed).to_bytes(8, "big") + bytes(label)
    return int.from_bytes(hashlib.blake2b(material, digest_size=16).digest(), "big")


@dataclass
class RandomStream:
    """Deterministic random stream bound to a (seed, label) pair.

    Two streams built from the same pair replay the same sequence; distinct
    labels under one seed give independent-looking sequences. Backed by the
    counter-based Philox generator, keyed with BLAKE2b(seed || label).
    """

    origin_seed: int
    label: bytes
    _gen: np.random.Generator = field(repr=False)

    def words(self, n: int) -> np.ndarray:
        """Return ``n`` uniform 64-bit words."""
        return self._gen.integers(_U64_MAX, dtype=np.uint64, endpoint=True, size=n)

    def normals(self, n: int) -> np.ndarray:
        """Return ``n`` standard-normal draws."""
        return self._gen.standard_normal(n)

    def uniforms(self, n: int) -> np.ndarray:
        """Return ``n`` uniform reals in [0, 1)."""
        return self._gen.random(n)

    def integers(self, n: int, high: int) -> np.ndarray:
        """Return ``n`` uniform integers in [0, high)."""
        if high < 1:
            raise InvalidArgumentError("high must be >= 1")
        return self._gen.integers(0, high, size=n, dtype=np.int64)

    def permutation(self, n: int) -> np.ndarray:
        """Return a uniform permutation of range(n)."""
        return self._gen.permutation(n)


def derive_stream(seed: int, label: bytes | str) -> RandomStream:
    """Derive the deterministic stream identified by (seed, label)."""
    if isinstance(label, str):
        label = label.encode("utf-8")
    if not 0 <= int(seed) < 2**64:
        raise InvalidArgumentError(f"seed must be an unsigned 64-bit integer, got {seed}")
    gen = np.random.Generator(np.random.Philox(key=_philox_key(seed, label)))
    return RandomStream(origin_seed=int(seed), label=bytes(label), _gen=gen)


def gaussian_matrix(stream: RandomStream, rows: int, cols: int) -> np.ndarray:
    """Matrix of i.i.d. standard-normal entries, consumed in row-major order."""
    if rows < 1 or cols < 1:
        raise InvalidArgumentError(f"matrix dimensions must be >= 1, got {rows}x{cols}")
    return stream.normals(rows * cols).reshape(rows, cols)


def gram_schmidt(m: np.ndarray) -> np.ndarray:
    """Orthonormalize the rows of ``m`` (modified Gram-Schmidt, two passes).

    The result spans the same row space. Requires rows <= cols; raises
    DegenerateInputError when a residual collapses below 1e-12, which signals
    linearly dependent rows.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise InvalidArgumentError("expected a 2-D matrix")
    rows, cols = m.shape
    if rows > cols:
        raise InvalidArgumentError(f"need rows <= cols to orthonormalize rows, got {rows}x{cols}")
    q = m.copy()
    for i in range(rows):
        v = q[i]
        # second pass restores orthogonality lost to cancellation at high dim
        for _ in range(2):
            if i:
                v = v - (q[:i] @ v) @ q[:i]
        norm = float(np.linalg.norm(v))
        if norm < 1e-12:
            raise DegenerateInputError(f"row {i} is linearly dependent on previous rows")
        q[i] = v / norm
    return q


@dataclass
class PcaModel:
    """Principal-component model: per-column mean, orthonormal component rows
    (r x input_cols) and the explained variance of each component, sorted
    non-increasing."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def input_dim(self) -> int:
        return self.components.shape[1]


def pca_fit(x: np.ndarray, r: int) -> PcaModel:
    """Fit the top-``r`` principal components of the column-centered data.

    Uses the SVD of the centered matrix for every shape: the right singular
    vectors remain orthonormal to machine precision even when trailing
    singular values vanish, which matters for the rank-deficient bit matrices
    this toolkit routinely feeds in. Explained variances are the eigenvalues
    of the unbiased sample covariance (divisor rows - 1).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidArgumentError("expected a 2-D matrix")
    rows, cols = x.shape
    if rows < 2:
        raise InvalidArgumentError(f"need at least 2 rows to fit a PCA, got {rows}")
    if not np.isfinite(x).all():
        raise InvalidArgumentError("input contains non-finite values")
    if not 1 <= r <= min(rows - 1, cols):
        raise InvalidArgumentError(
            f"r={r} out of range, need 1 <= r <= min(rows-1, cols) = {min(rows - 1, cols)}"
        )
    mean = x.mean(axis=0)
    centered = x - mean
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    explained = (singular[:r] ** 2) / (rows - 1)
    return PcaModel(mean=mean, components=vt[:r].copy(), explained_variance=explained)


def pca_transform(model: PcaModel, x: np.ndarray) -> np.ndarray:
    """Project centered data onto the model's components (rows x r output)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.input_dim:
        raise InvalidArgumentError(
            f"expected rows of dimension {model.input_dim}, got shape {x.shape}"
        )
    return (x - model.mean) @ model.components.T


def covariance(x: np.ndarray) -> np.ndarray:
    """Unbiased sample covariance (divisor rows - 1), exactly symmetric."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidArgumentError("expected a 2-D matrix")
    rows = x.shape[0]
    if rows < 2:
        raise InvalidArgumentError(f"need at least 2 rows for a covariance, got {rows}")
    if not np.isfinite(x).all():
        raise InvalidArgumentError("input contains non-finite values")
    centered = x - x.mean(axis=0)
    cov = (centered.T @ centered) / (rows - 1)
    return (cov + cov.T) / 2.0


def default_ridge(cov: np.ndarray) -> float:
    """Trace-scaled diagonal regularizer: 1e-6 * trace/dim, floored at 1e-12.

    Rank-deficient covariances (stolen-scenario protected templates are a
    routine source) need the floor to stay factorizable.
    """
    cov = np.asarray(cov, dtype=np.float64)
    dim = cov.shape[0]
    return max(1e-12, 1e-6 * float(np.trace(cov)) / dim)


def gaussian_entropy(cov: np.ndarray, ridge: float = 0.0) -> float:
    """Differential entropy (nats) of a Gaussian with covariance ``cov + ridge*I``.

    Returns 0.5 * (dim * ln(2*pi*e) + logdet(cov + ridge*I)) with the
    log-determinant taken from a Cholesky factorization; raises NumericError
    when the regularized matrix is still not positive definite.
    """
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise InvalidArgumentError("covariance must be square")
    if ridge < 0:
        raise InvalidArgumentError("ridge must be >= 0")
    dim = cov.shape[0]
    scale = max(1.0, float(np.abs(cov).max(initial=0.0)))
    if float(np.abs(cov - cov.T).max(initial=0.0)) > 1e-8 * scale:
        raise InvalidArgumentError("covariance must be symmetric")
    a = cov + ridge * np.eye(dim)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"covariance not positive definite after ridge={ridge!r}") from exc
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return dim * _HALF_LN_2PI_E + 0.5 * logdet
