"""Hermitian and positive definite matrix arithmetic under a normalized trace.

Every norm in this package derives from the scalar product tau(x* y) with
tau = trace / dim, so the identity has L2 norm one in every dimension and
norms of different dimensions are directly comparable.  All matrix
functions go through one eigendecomposition of the (symmetrized) input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidMatrix,
    NonConvergence,
    NotHermitian,
    NotPositiveDefinite,
)

# Relative asymmetry (against the L2 norm) tolerated before a matrix is
# refused as non-Hermitian.
HERMITIAN_RTOL = 1e-10

# Relative reconstruction tolerance expected from an eigendecomposition.
SPECTRAL_TOL = 1e-10

# Relative tolerance for functional-calculus identities such as
# exp(log(a)) = a on well conditioned inputs.
FUNC_TOL = 1e-8

# eig_min <= PD_FLOOR * eig_max counts as not positive definite.
PD_FLOOR = 1e-12


def as_square_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite square complex128 array.

    Raises
    ------
    DimensionMismatch
        If ``a`` is not a nonempty square matrix.
    InvalidMatrix
        If any entry is NaN or infinite.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(
            f"{name}: expected a nonempty square matrix, got shape {m.shape}"
        )
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise InvalidMatrix(f"{name}: entries must be finite")
    return m


def ntrace(x) -> complex:
    """Normalized trace tau(x) = trace(x) / dim; tau(identity) = 1."""
    m = as_square_matrix(x)
    return complex(np.trace(m)) / m.shape[0]


def l2_norm(x) -> float:
    """Normalized Frobenius norm sqrt(tau(x* x)).

    Equals the plain Frobenius norm divided by sqrt(dim), so the identity
    has norm one regardless of dimension.
    """
    m = as_square_matrix(x)
    return float(np.sqrt(np.sum(np.abs(m) ** 2) / m.shape[0]))


def operator_norm(x) -> float:
    """Largest singular value of ``x``."""
    m = as_square_matrix(x)
    try:
        return float(np.linalg.norm(m, 2))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NonConvergence(f"singular values failed to converge: {exc}") from exc


def hermitian_part(a, name: str = "matrix") -> np.ndarray:
    """Symmetrize ``a`` to (a + a*)/2, refusing genuinely asymmetric input.

    Asymmetry up to ``HERMITIAN_RTOL * l2_norm(a)`` (measured entrywise in
    absolute value) is treated as roundoff and silently symmetrized; more
    raises :class:`NotHermitian`.
    """
    m = as_square_matrix(a, name)
    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym > HERMITIAN_RTOL * l2_norm(m):
        raise NotHermitian(
            f"{name}: asymmetry {asym:.3e} exceeds {HERMITIAN_RTOL:g} * l2_norm"
        )
    return 0.5 * (m + m.conj().T)


def spectral_decompose(a, name: str = "matrix"):
    """Eigenvalues (ascending) and a unitary eigenbasis of a Hermitian matrix.

    Returns
    -------
    w : (n,) float array
    v : (n, n) complex array with a = v @ diag(w) @ v.conj().T
    """
    h = hermitian_part(a, name)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"{name}: eigendecomposition failed: {exc}") from exc
    return w, v


def _pd_spectral(a, name: str = "matrix"):
    """Eigendecomposition plus positivity check (floor PD_FLOOR * eig_max)."""
    w, v = spectral_decompose(a, name)
    if w[-1] <= 0.0 or w[0] <= PD_FLOOR * w[-1]:
        raise NotPositiveDefinite(
            f"{name}: eigenvalue range [{w[0]:.6e}, {w[-1]:.6e}]"
            " is not positive definite"
        )
    return w, v


def _rebuild(w, v) -> np.ndarray:
    """Assemble v @ diag(w) @ v* and re-symmetrize against roundoff."""
    m = (v * w) @ v.conj().T
    return 0.5 * (m + m.conj().T)


def matrix_sqrt(a) -> np.ndarray:
    """Principal square root of a positive definite matrix."""
    w, v = _pd_spectral(a)
    return _rebuild(np.sqrt(w), v)


def matrix_inv_sqrt(a) -> np.ndarray:
    """Inverse principal square root of a positive definite matrix."""
    w, v = _pd_spectral(a)
    return _rebuild(1.0 / np.sqrt(w), v)


def matrix_log(a) -> np.ndarray:
    """Logarithm of a positive definite matrix (Hermitian result)."""
    w, v = _pd_spectral(a)
    return _rebuild(np.log(w), v)


def matrix_power(a, t: float) -> np.ndarray:
    """Real matrix power a**t of a positive definite matrix."""
    w, v = _pd_spectral(a)
    return _rebuild(np.power(w, float(t)), v)


def matrix_exp(a) -> np.ndarray:
    """Exponential of a Hermitian matrix (positive definite result)."""
    w, v = spectral_decompose(a)
    return _rebuild(np.exp(w), v)


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    """A validated positive definite matrix with cached spectral bounds."""

    mat: np.ndarray
    eig_min: float
    eig_max: float

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __array__(self, dtype=None, copy=None):
        # lets every array consumer accept SpdMatrix transparently
        if dtype is None:
            return self.mat if not copy else self.mat.copy()
        return self.mat.astype(dtype)


def spd(a, name: str = "matrix") -> SpdMatrix:
    """Validate ``a`` as Hermitian positive definite and wrap it.

    The input is symmetrized under the ``HERMITIAN_RTOL`` rule and the
    extreme eigenvalues are cached on the wrapper.
    """
    h = hermitian_part(a, name)
    try:
        w = np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"{name}: eigendecomposition failed: {exc}") from exc
    if w[-1] <= 0.0 or w[0] <= PD_FLOOR * w[-1]:
        raise NotPositiveDefinite(
            f"{name}: eigenvalue range [{w[0]:.6e}, {w[-1]:.6e}]"
            " is not positive definite"
        )
    return SpdMatrix(h, float(w[0]), float(w[-1]))


def identity_spd(dim: int) -> SpdMatrix:
    """The identity as an :class:`SpdMatrix`."""
    return SpdMatrix(np.eye(dim, dtype=np.complex128), 1.0, 1.0)
