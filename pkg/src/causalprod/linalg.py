"""Dense complex linear algebra: determinants, leading minors, semidefinite
Cholesky, PSD certification and seeded random PSD generation.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The only wrapper
type is :class:`HermitianPsd`, which marks a matrix that passed
:func:`certify_psd` and carries its spectral metadata.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

TOL_HERM = 1e-12
TOL_PSD = 1e-10
TOL_RECON = 1e-10
TOL_DET = 1e-9

BRUTEFORCE_MAX_N = 8


class CertificationError(ValueError):
    """Base class for matrices rejected by :func:`certify_psd` or :func:`cholesky`."""


class NotHermitianError(CertificationError):
    def __init__(self, deviation: float, tolerance: float):
        self.deviation = deviation
        self.tolerance = tolerance
        super().__init__(
            f"not Hermitian: max |m - m*| = {deviation:.3e} > {tolerance:.3e}"
        )


class NotPSDError(CertificationError):
    def __init__(self, min_eigenvalue: float, tolerance: float):
        self.min_eigenvalue = min_eigenvalue
        self.tolerance = tolerance
        super().__init__(
            f"not PSD: eigenvalue/pivot {min_eigenvalue:.6g} < -{tolerance:.3e}"
        )


class OracleTooLargeError(ValueError):
    pass


def as_matrix(m: ArrayLike) -> NDArray[np.complex128]:
    """Validate and convert ``m`` to a square, finite complex128 array."""
    if isinstance(m, HermitianPsd):
        return m.matrix
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def as_vector(v: ArrayLike) -> NDArray[np.complex128]:
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise ValueError(f"expected a non-empty vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector has non-finite entries")
    return arr


def _frozen(arr: NDArray) -> NDArray:
    out = np.array(arr, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class HermitianPsd:
    """A certified Hermitian positive semidefinite matrix.

    Construct through :func:`certify_psd`; the constructor itself performs no
    checks.
    """

    matrix: NDArray[np.complex128]
    min_eigenvalue: float
    spectral_norm: float
    rank_estimate: int

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def scale(self) -> float:
        return max(1.0, self.spectral_norm)

    @property
    def is_definite(self) -> bool:
        return self.min_eigenvalue > TOL_PSD * self.scale

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)


def det(m: ArrayLike) -> complex:
    """Determinant by LU factorization with partial pivoting (LAPACK ``getrf``)."""
    a = as_matrix(m)
    if a.shape[0] == 1:
        return complex(a[0, 0])
    return complex(np.linalg.det(a))


def det_bruteforce(m: ArrayLike) -> complex:
    """Leibniz permutation expansion of the determinant.

    Independent oracle for :func:`det`; refuses dimensions above 8.
    """
    a = as_matrix(m)
    n = a.shape[0]
    if n > BRUTEFORCE_MAX_N:
        raise OracleTooLargeError(
            f"oracle too large: n = {n} > {BRUTEFORCE_MAX_N}"
        )
    rows = a.tolist()
    total = 0j
    for perm in itertools.permutations(range(n)):
        # sign from the inversion count
        inversions = sum(
            1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j]
        )
        term = 1 + 0j
        for i, p in enumerate(perm):
            term *= rows[i][p]
        total += -term if inversions % 2 else term
    return total


def leading_minors(a: ArrayLike) -> NDArray[np.float64]:
    """Real parts of ``det(A_n)`` for the leading principal blocks, n = 0..N-1."""
    m = as_matrix(a)
    n = m.shape[0]
    out = np.empty(n)
    out[0] = m[0, 0].real
    for k in range(1, n):
        out[k] = np.linalg.det(m[: k + 1, : k + 1]).real
    return out


def cholesky(a: ArrayLike) -> NDArray[np.complex128]:
    """Rank-revealing lower Cholesky factor of a Hermitian PSD matrix.

    Pivots within ``TOL_PSD * max(1, ||A||)`` of zero are clamped to zero and
    the rest of that column is zeroed, so rank-deficient inputs factor cleanly.

    Raises
    ------
    NotPSDError
        If a pivot falls below ``-TOL_PSD * max(1, ||A||)``, or if a clamped
        pivot leaves an off-diagonal residual that no PSD matrix could have.
    """
    if isinstance(a, HermitianPsd):
        m = a.matrix
        scale = a.scale
    else:
        m = as_matrix(a)
        m = 0.5 * (m + m.conj().T)
        scale = max(1.0, float(np.linalg.norm(m, 2)))
    n = m.shape[0]
    tol = TOL_PSD * scale
    L = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        row = L[j, :j]
        pivot = float((m[j, j] - np.vdot(row, row)).real)
        residual = m[j + 1 :, j] - L[j + 1 :, :j] @ row.conj()
        if pivot < -tol:
            raise NotPSDError(pivot, tol)
        if pivot <= tol:
            # PSD forces |r_ij|^2 <= r_ii r_jj, so a dead pivot needs a dead column
            if residual.size and np.max(np.abs(residual)) > math.sqrt(tol * scale):
                raise NotPSDError(pivot, tol)
            continue
        d = math.sqrt(pivot)
        L[j, j] = d
        L[j + 1 :, j] = residual / d
    return L


def gram_vectors(a: ArrayLike) -> list[NDArray[np.complex128]]:
    """Columns ``u_j`` of the Cholesky factor, so that ``sum_j u_j u_j^* = A``."""
    L = cholesky(a)
    return [L[:, j].copy() for j in range(L.shape[1])]


def certify_psd(m: ArrayLike) -> HermitianPsd:
    """Certify ``m`` as Hermitian PSD and return it with spectral metadata.

    The matrix is symmetrized as ``(m + m^*)/2`` before the eigendecomposition.
    """
    if isinstance(m, HermitianPsd):
        return m
    a = as_matrix(m)
    herm = 0.5 * (a + a.conj().T)
    eig = np.linalg.eigvalsh(herm)
    spectral_norm = float(np.max(np.abs(eig)))
    scale = max(1.0, spectral_norm)
    deviation = float(np.max(np.abs(a - a.conj().T)))
    if deviation > TOL_HERM * scale:
        raise NotHermitianError(deviation, TOL_HERM * scale)
    tol = TOL_PSD * scale
    min_eig = float(eig[0])
    if min_eig < -tol:
        raise NotPSDError(min_eig, tol)
    rank = int(np.sum(eig > tol))
    return HermitianPsd(_frozen(herm), min_eig, spectral_norm, rank)


def is_psd(m: ArrayLike) -> bool:
    try:
        certify_psd(m)
    except CertificationError:
        return False
    return True


def derive_seed(*keys: int) -> int:
    """Stable 64-bit seed mixed from a tuple of non-negative integers."""
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)
    return int(state[0])


def rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(key=int(seed) % 2**64))


def complex_gaussian(gen: np.random.Generator, shape) -> NDArray[np.complex128]:
    """Standard complex Gaussian entries, E|z|^2 = 1."""
    re = gen.standard_normal(shape)
    im = gen.standard_normal(shape)
    return (re + 1j * im) / math.sqrt(2.0)


def random_psd(n: int, rank: int, seed: int) -> HermitianPsd:
    """Random ``G G^*`` with ``G`` an ``n x rank`` complex Gaussian matrix.

    Identical ``(n, rank, seed)`` give bitwise-identical output.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= rank <= n:
        raise ValueError(f"rank must lie in [1, {n}], got {rank}")
    g = complex_gaussian(rng(seed), (n, rank))
    return certify_psd(g @ g.conj().T)
