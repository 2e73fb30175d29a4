"""Quantum channels in Kraus form and the workbench's built-in noise model.

Channels are stored as explicit Kraus operator lists; superoperator or Choi
representations are derived on demand where needed. States are wrapped in
:class:`DensityMatrix`, which repairs harmless floating-point drift on
construction and rejects anything worse.
"""

from __future__ import annotations

import numpy as np

from .linalg import as_complex_matrix, dagger, kron

__all__ = [
    "CONTROLLED_Z",
    "ChannelValidationError",
    "DensityMatrix",
    "ID2",
    "ID4",
    "KrausChannel",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "PHASE_FLIP_FIRST",
    "PHASE_FLIP_SECOND",
    "anticorrelated_phase_flip",
    "apply",
    "apply_matrix",
    "channel_from_unitary",
    "compose",
    "dual",
    "is_unital",
    "make_channel",
    "random_density",
]


class ChannelValidationError(ValueError):
    """Raised when a state or channel fails its construction invariants."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


ID2 = _frozen(np.eye(2))
ID4 = _frozen(np.eye(4))
PAULI_X = _frozen([[0, 1], [1, 0]])
PAULI_Y = _frozen([[0, -1j], [1j, 0]])
PAULI_Z = _frozen([[1, 0], [0, -1]])

# Photon 1 owns the most significant tensor factor throughout the package.
PHASE_FLIP_FIRST = _frozen(np.kron(PAULI_Z, ID2))
PHASE_FLIP_SECOND = _frozen(np.kron(ID2, PAULI_Z))
CONTROLLED_Z = _frozen(np.diag([1, 1, 1, -1]))


class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace state matrix.

    Eigenvalues in ``[-1e-9, 0)`` are clipped to zero and the matrix
    renormalized, so bounded floating-point drift from channel arithmetic
    never fails a pipeline. Larger violations raise.
    """

    __slots__ = ("mat",)

    HERMITIAN_ATOL = 1e-10
    TRACE_ATOL = 1e-8
    EIGENVALUE_FLOOR = -1e-9

    def __init__(self, mat):
        m = as_complex_matrix(mat)
        if m.shape[0] != m.shape[1]:
            raise ChannelValidationError(f"state matrix must be square, got {m.shape}")
        herm_dev = float(np.abs(m - m.conj().T).max())
        if herm_dev > self.HERMITIAN_ATOL:
            raise ChannelValidationError(f"state is not Hermitian: deviation {herm_dev:.3e}")
        m = (m + m.conj().T) / 2
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > self.TRACE_ATOL:
            raise ChannelValidationError(f"state trace {tr!r} is not 1")
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < self.EIGENVALUE_FLOOR:
            raise ChannelValidationError(f"state is not positive semidefinite: min eigenvalue {lo:.3e}")
        if lo < 0.0:
            vals, vecs = np.linalg.eigh(m)
            m = (vecs * np.clip(vals, 0.0, None)) @ vecs.conj().T
            m = (m + m.conj().T) / 2
            tr = float(np.trace(m).real)
        m = m / tr
        m.setflags(write=False)
        self.mat = m

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def purity(self) -> float:
        return float(np.trace(self.mat @ self.mat).real)

    def __repr__(self) -> str:  # pragma: no cover
        return f"DensityMatrix(dim={self.dim}, purity={self.purity:.6f})"


class KrausChannel:
    """Completely positive trace preserving map given by its Kraus operators."""

    __slots__ = ("kraus_ops",)

    TP_ATOL = 1e-8

    def __init__(self, kraus_ops, *, check_trace_preserving: bool = True):
        ops = tuple(as_complex_matrix(k) for k in kraus_ops)
        if not ops:
            raise ChannelValidationError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        for k in ops:
            if k.shape != (d, d):
                raise ChannelValidationError(
                    f"Kraus operators must all be {d}x{d}, got {k.shape}"
                )
        if check_trace_preserving:
            residual = _tp_residual(ops)
            if residual > self.TP_ATOL:
                raise ChannelValidationError(
                    f"Kraus operators are not trace preserving: residual {residual:.6g}"
                )
        self.kraus_ops = ops

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    def trace_preservation_residual(self) -> float:
        return _tp_residual(self.kraus_ops)

    def __repr__(self) -> str:  # pragma: no cover
        return f"KrausChannel(dim={self.dim}, n_kraus={len(self.kraus_ops)})"


def _tp_residual(ops) -> float:
    d = ops[0].shape[0]
    s = sum(dagger(k) @ k for k in ops) - np.eye(d)
    return float(np.abs(np.linalg.eigvalsh((s + s.conj().T) / 2)).max())


def make_channel(ops) -> KrausChannel:
    """Validate a Kraus operator list into a channel."""
    return KrausChannel(ops)


def apply_matrix(channel: KrausChannel, mat) -> np.ndarray:
    """Raw channel action on an arbitrary matrix, no state validation."""
    m = as_complex_matrix(mat)
    if m.shape != (channel.dim, channel.dim):
        raise ChannelValidationError(
            f"matrix of shape {m.shape} does not match channel dimension {channel.dim}"
        )
    out = np.zeros_like(m)
    for k in channel.kraus_ops:
        out += k @ m @ k.conj().T
    return out


def apply(channel: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    """Channel action on a state."""
    return DensityMatrix(apply_matrix(channel, rho.mat))


def dual(channel: KrausChannel) -> KrausChannel:
    """Adjoint map, defined by Tr(E(rho) X) = Tr(rho E_dual(X)).

    Its Kraus operators are the adjoints of the original ones. The adjoint
    of a trace preserving map is trace preserving exactly when the original
    is unital, so the check is skipped otherwise.
    """
    ops = tuple(dagger(k) for k in channel.kraus_ops)
    return KrausChannel(ops, check_trace_preserving=is_unital(channel, KrausChannel.TP_ATOL))


def compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    """Sequential action ``second(first(rho))`` as a single Kraus channel.

    All pairwise products are kept, even linearly dependent ones.
    """
    if second.dim != first.dim:
        raise ChannelValidationError(
            f"cannot compose channels of dimensions {second.dim} and {first.dim}"
        )
    ops = tuple(a @ b for a in second.kraus_ops for b in first.kraus_ops)
    return KrausChannel(ops)


def is_unital(channel: KrausChannel, tol: float = 1e-10) -> bool:
    """True when the channel fixes the identity."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = sum(k @ dagger(k) for k in channel.kraus_ops) - np.eye(channel.dim)
    return float(np.linalg.norm(s)) < tol


def channel_from_unitary(u) -> KrausChannel:
    """Single-Kraus channel ``rho -> u rho u†``."""
    mat = as_complex_matrix(u)
    if mat.shape[0] != mat.shape[1]:
        raise ChannelValidationError("unitary must be square")
    dev = float(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])).max())
    if dev > 1e-10:
        raise ChannelValidationError(f"matrix is not unitary: deviation {dev:.3e}")
    return KrausChannel((mat,))


def anticorrelated_phase_flip() -> KrausChannel:
    """Two-qubit noise applying a phase flip to exactly one photon per event.

    Kraus operators are ``(Z x I)/sqrt(2)`` and ``(I x Z)/sqrt(2)``; the map
    preserves populations, negates the outer and inner anti-diagonal
    coherences and erases every other off-diagonal element.
    """
    return KrausChannel((PHASE_FLIP_FIRST / np.sqrt(2), PHASE_FLIP_SECOND / np.sqrt(2)))


def random_density(rng: np.random.Generator, dim: int, pure: bool = False) -> DensityMatrix:
    """Sample a state: Haar-like pure vector or Hilbert-Schmidt mixed."""
    if pure:
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        v /= np.linalg.norm(v)
        return DensityMatrix(np.outer(v, v.conj()))
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)
