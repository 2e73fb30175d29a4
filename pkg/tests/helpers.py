"""Shared fixtures-in-spirit: random ensembles and independent oracles.

The oracles here deliberately avoid the production code paths: the noise
pattern is written out entrywise, and commutant dimensions are counted by
exact symbolic rank over the entrywise commutation constraints.
"""

from __future__ import annotations

import numpy as np
import sympy

from ucclab.channels import KrausChannel

KET_HH = np.array([1, 0, 0, 0], dtype=complex)
KET_VV = np.array([0, 0, 0, 1], dtype=complex)
PHI_PLUS = (KET_HH + KET_VV) / np.sqrt(2)
PHI_MINUS = (KET_HH - KET_VV) / np.sqrt(2)


def projector(ket: np.ndarray) -> np.ndarray:
    return np.outer(ket, ket.conj())


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_cptp(rng: np.random.Generator, dim: int, n_kraus: int) -> KrausChannel:
    """Haar-style random channel: Kraus blocks of a random isometry."""
    g = rng.normal(size=(dim * n_kraus, dim)) + 1j * rng.normal(size=(dim * n_kraus, dim))
    q, _ = np.linalg.qr(g)
    return KrausChannel([q[i * dim : (i + 1) * dim, :] for i in range(n_kraus)])


def amplitude_damping(gamma: float) -> KrausChannel:
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return KrausChannel([k0, k1])


def depolarize_second_photon() -> KrausChannel:
    paulis = [
        np.eye(2, dtype=complex),
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]], dtype=complex),
        np.array([[1, 0], [0, -1]], dtype=complex),
    ]
    return KrausChannel([np.kron(np.eye(2), p) / 2.0 for p in paulis])


def expected_phaseflip_action(mat: np.ndarray) -> np.ndarray:
    """Entrywise oracle for the anticorrelated phase-flip channel.

    Populations survive, the (0,3)/(3,0) and (1,2)/(2,1) coherences flip
    sign, every other off-diagonal entry is erased.
    """
    out = np.zeros_like(mat)
    for i in range(4):
        out[i, i] = mat[i, i]
    for i, j in ((0, 3), (3, 0), (1, 2), (2, 1)):
        out[i, j] = -mat[i, j]
    return out


def commutant_dim_bruteforce(generators) -> int:
    """Exact commutant dimension by symbolic rank of entrywise constraints.

    Enumerates the equations (G M - M G)_{ij} = 0 in the d*d unknowns of M,
    one row per generator and entry, and counts the nullity over the
    rationals. Only meant for small integer generators.
    """
    mats = [np.asarray(g) for g in generators]
    d = mats[0].shape[0]
    rows = []
    for g in mats:
        if np.abs(g.imag).max() > 0:
            raise ValueError("brute-force oracle expects real integer generators")
        gi = g.real.astype(int)
        for i in range(d):
            for j in range(d):
                row = [0] * (d * d)
                for k in range(d):
                    row[k * d + j] += int(gi[i, k])
                    row[i * d + k] -= int(gi[k, j])
                rows.append(row)
    system = sympy.Matrix(rows)
    return d * d - system.rank()


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.svd(a - b, compute_uv=False).sum()) / 2.0


def same_action(channel_a, channel_b, rng, dim: int, trials: int = 8, tol: float = 1e-10) -> bool:
    """Whether two channels agree as maps on random states."""
    from ucclab.channels import apply_matrix, random_density

    for _ in range(trials):
        rho = random_density(rng, dim).mat
        if np.abs(apply_matrix(channel_a, rho) - apply_matrix(channel_b, rho)).max() > tol:
            return False
    return True
