"""Dense complex linear algebra helpers shared by the whole workbench.

All functions accept anything ``np.asarray`` can turn into a complex matrix
and return plain numpy arrays. Nothing here mutates its inputs; matrices are
assumed to be O(1) in norm, which is why Hermiticity checks use an absolute
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HermitianEigenResult",
    "as_complex_matrix",
    "dagger",
    "eig_hermitian",
    "frobenius",
    "is_hermitian",
    "kron",
    "nullspace",
    "partial_trace",
    "sqrt_psd",
    "trace",
]

HERMITIAN_ATOL = 1e-10


def as_complex_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("matrix entries must be finite")
    return arr


def kron(a, b) -> np.ndarray:
    """Kronecker product, first factor owning the slow (most significant) index."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def dagger(a) -> np.ndarray:
    """Conjugate transpose."""
    return as_complex_matrix(a).conj().T


def trace(a) -> complex:
    arr = as_complex_matrix(a)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"trace requires a square matrix, got {arr.shape}")
    return complex(np.trace(arr))


def frobenius(a) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(np.asarray(a)))


def is_hermitian(a, atol: float = HERMITIAN_ATOL) -> bool:
    arr = as_complex_matrix(a)
    if arr.shape[0] != arr.shape[1]:
        return False
    return float(np.abs(arr - arr.conj().T).max()) <= atol


def partial_trace(a, dims, keep) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep``.

    ``dims`` lists the factor dimensions from the most significant index
    down; ``keep`` is a set of factor positions to retain. The result keeps
    the surviving factors in their original order, so the full trace is
    reproduced when ``keep`` is empty.
    """
    arr = as_complex_matrix(a)
    dims = [int(d) for d in dims]
    if any(d <= 0 for d in dims):
        raise ValueError("subsystem dimensions must be positive")
    total = int(np.prod(dims))
    if arr.shape != (total, total):
        raise ValueError(
            f"matrix of shape {arr.shape} does not match subsystem dimensions {dims}"
        )
    kept = sorted(set(int(k) for k in keep))
    n = len(dims)
    if kept and (kept[0] < 0 or kept[-1] >= n):
        raise ValueError(f"keep indices {kept} out of range for {n} subsystems")

    tensor = arr.reshape(dims + dims)
    row = list(range(n))
    col = [i + n if i in kept else i for i in range(n)]
    out = [i for i in kept] + [i + n for i in kept]
    reduced = np.einsum(tensor, row + col, out)
    kept_dim = int(np.prod([dims[i] for i in kept])) if kept else 1
    return reduced.reshape(kept_dim, kept_dim)


@dataclass(frozen=True)
class HermitianEigenResult:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # orthonormal columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eig_hermitian(a, atol: float = HERMITIAN_ATOL) -> HermitianEigenResult:
    arr = as_complex_matrix(a)
    if not is_hermitian(arr, atol):
        raise ValueError("matrix is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh((arr + arr.conj().T) / 2)
    return HermitianEigenResult(eigenvalues=vals, eigenvectors=vecs)


def sqrt_psd(a, neg_tol: float = 1e-10) -> np.ndarray:
    """Hermitian square root of a positive semidefinite matrix.

    Eigenvalues in ``[-neg_tol, 0)`` are treated as floating-point noise and
    clipped to zero; anything below that is rejected. Positive eigenvalues at
    the round-off scale are zeroed as well: the square root would amplify
    them from eps to sqrt(eps), which is what ruins fidelity computations on
    nearly pure states.
    """
    res = eig_hermitian(a)
    vals = res.eigenvalues
    if vals[0] < -neg_tol:
        raise ValueError(f"matrix is not positive semidefinite: min eigenvalue {vals[0]:.3e}")
    floor = 100 * np.finfo(float).eps * max(float(vals[-1]), 0.0)
    cleaned = np.where(vals > floor, vals, 0.0)
    root = np.sqrt(cleaned)
    v = res.eigenvectors
    out = (v * root) @ v.conj().T
    return (out + out.conj().T) / 2


def nullspace(a, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (as columns) of the right nullspace of ``a``.

    Singular values below ``tol`` times the largest singular value are
    treated as zero. Returns an ``(n, k)`` array; ``k`` is zero for a
    full-rank matrix.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    arr = as_complex_matrix(a)
    _, s, vh = np.linalg.svd(arr)
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > tol * smax))
    return vh[rank:].conj().T
