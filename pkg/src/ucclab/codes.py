"""Discovery of passive and unitarily correctable codes for Kraus channels.

For a unital channel the noise-immune structure lives in the commutant of
its Kraus operators: decomposing that algebra into blocks of the form
``I_m (x) M_n`` exposes subsystems the noise never disturbs (a
decoherence-free subspace when ``m = 1``, a noiseless subsystem when
``m >= 2``). Codes that become noiseless only after a fixed unitary
recovery are found by running the same decomposition on the composite of
the channel with its dual map.

The block decomposition samples generic elements of the algebra and of its
center with a seeded generator, so results are deterministic run to run.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .channels import KrausChannel, apply_matrix, compose, dual, is_unital
from .linalg import as_complex_matrix, dagger, nullspace, partial_trace

__all__ = [
    "AlgebraBlock",
    "AlgebraStructure",
    "CodeReport",
    "NonUnitalChannelError",
    "NotUnitarilyCorrectableError",
    "algebra_structure",
    "commutant_basis",
    "construct_recovery",
    "correction_deviation",
    "find_noiseless_subsystems",
    "find_unitarily_correctable_codes",
    "verify_correction",
]

GROUPING_RTOL = 1e-7


class NonUnitalChannelError(ValueError):
    """The commutant characterization of passive codes needs a unital channel."""


class NotUnitarilyCorrectableError(ValueError):
    """Raised when no single effective isometry exists on the codespace."""


@dataclass(frozen=True)
class AlgebraBlock:
    """One ``I_m (x) M_n`` factor of a decomposed matrix algebra."""

    multiplicity: int
    block_dim: int
    isometry: np.ndarray  # full-space columns, ordered multiplicity-major


@dataclass(frozen=True)
class AlgebraStructure:
    basis: tuple[np.ndarray, ...]
    blocks: tuple[AlgebraBlock, ...]


@dataclass(frozen=True)
class CodeReport:
    """A protected subsystem: projectors, dimensions and optional recovery.

    ``isometry`` maps the ``dim_b * dim_a`` block coordinates (gauge factor
    major, information factor minor) into the full space; ``projector`` is
    the orthogonal projector onto its range.
    """

    kind: str  # "DFS" | "NS" | "UCC"
    dim_a: int  # information-carrying factor
    dim_b: int  # gauge factor
    projector: np.ndarray
    complement: np.ndarray
    isometry: np.ndarray
    recovery: np.ndarray | None = None


def _commutation_operator(g: np.ndarray) -> np.ndarray:
    # Row-major vectorization: vec([G, M]) = (G (x) I - I (x) G^T) vec(M).
    d = g.shape[0]
    eye = np.eye(d)
    return np.kron(g, eye) - np.kron(eye, g.T)


def commutant_basis(generators, tol: float = 1e-10) -> list[np.ndarray]:
    """Hilbert-Schmidt orthonormal basis of everything commuting with the generators.

    The generator list is closed under adjoints first, so the result is
    always a star-algebra. Solved as the joint nullspace of the stacked
    vectorized commutation operators.
    """
    gens = [as_complex_matrix(g) for g in generators]
    if not gens:
        raise ValueError("at least one generator is required")
    d = gens[0].shape[0]
    for g in gens:
        if g.shape != (d, d):
            raise ValueError(f"generators must all be {d}x{d}, got {g.shape}")
    closed: list[np.ndarray] = []
    for g in gens:
        closed.append(g)
        closed.append(dagger(g))
    stacked = np.vstack([_commutation_operator(g) for g in closed])
    # Cutoff against the generator scale, not the stacked matrix itself: a
    # generator that commutes with everything leaves only float noise here,
    # and a relative rule would mistake that noise for full rank.
    scale = max(1.0, max(float(np.linalg.norm(g)) for g in closed))
    _, s, vh = np.linalg.svd(stacked)
    rank = int(np.sum(s > tol * scale))
    null = vh[rank:].conj().T
    return [null[:, k].reshape(d, d) for k in range(null.shape[1])]


def _hs_project_residual(basis: list[np.ndarray], m: np.ndarray) -> float:
    """Residual of projecting ``m`` onto the span of an orthonormal basis."""
    recon = np.zeros_like(m)
    for b in basis:
        recon += np.trace(dagger(b) @ m) * b
    return float(np.linalg.norm(m - recon))


def _orthonormalize(mats: list[np.ndarray]) -> list[np.ndarray]:
    d = mats[0].shape[0]
    stack = np.array([m.reshape(-1) for m in mats])
    _, s, vh = np.linalg.svd(stack, full_matrices=False)
    rank = int(np.sum(s > 1e-12 * s[0])) if s.size and s[0] > 0 else 0
    return [vh[k].reshape(d, d) for k in range(rank)]


def _group_ascending(vals: np.ndarray, rtol: float) -> list[np.ndarray]:
    scale = max(1.0, float(np.abs(vals).max()))
    gap = rtol * scale
    groups: list[np.ndarray] = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] > gap:
            groups.append(np.arange(start, i))
            start = i
    return groups


class _RetryDecomposition(Exception):
    pass


def _random_hermitian_element(rng, basis) -> np.ndarray:
    coeff = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    m = sum(c * b for c, b in zip(coeff, basis))
    return (m + dagger(m)) / 2


def _random_element(rng, basis) -> np.ndarray:
    coeff = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    return sum(c * b for c, b in zip(coeff, basis))


def _polar_unitary(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def _center_basis(basis: list[np.ndarray], tol: float) -> list[np.ndarray]:
    # Solve [sum_i c_i B_i, B_j] = 0 for all j in coefficient space. The
    # cutoff is anchored at the (normalized) basis scale: for an abelian
    # algebra every commutator is pure round-off, and a relative rule would
    # mistake that noise for full rank and report an empty center.
    nb = len(basis)
    cols = []
    for i in range(nb):
        col = np.concatenate([(basis[i] @ bj - bj @ basis[i]).reshape(-1) for bj in basis])
        cols.append(col)
    system = np.array(cols).T
    _, s, vh = np.linalg.svd(system)
    cutoff = tol * max(1.0, float(s[0]) if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    null = vh[rank:].conj().T
    center = [sum(null[i, k] * basis[i] for i in range(nb)) for k in range(null.shape[1])]
    return center


def _decompose_once(rng, basis, support, tol) -> list[AlgebraBlock]:
    center = _center_basis(basis, 1e-10)
    if not center:
        raise _RetryDecomposition("empty center")

    z = _random_hermitian_element(rng, center)
    z_r = dagger(support) @ z @ support
    vals, vecs = np.linalg.eigh((z_r + dagger(z_r)) / 2)
    groups = _group_ascending(vals, GROUPING_RTOL)
    # Require clear separation between central eigenvalue clusters.
    for a, b in zip(groups, groups[1:]):
        if vals[b[0]] - vals[a[-1]] < 100 * GROUPING_RTOL * max(1.0, float(np.abs(vals).max())):
            raise _RetryDecomposition("central eigenvalues not well separated")

    x = _random_hermitian_element(rng, basis)
    t_generic = _random_element(rng, basis)

    blocks: list[AlgebraBlock] = []
    for grp in groups:
        frame = support @ vecs[:, grp]  # full-space orthonormal basis of the block
        block_dim_total = frame.shape[1]
        x_r = dagger(frame) @ x @ frame
        xvals, xvecs = np.linalg.eigh((x_r + dagger(x_r)) / 2)
        levels = _group_ascending(xvals, GROUPING_RTOL)
        sizes = {len(lv) for lv in levels}
        if len(sizes) != 1:
            raise _RetryDecomposition("unequal eigenspace multiplicities")
        mult = sizes.pop()
        n = len(levels)
        if mult * n != block_dim_total:
            raise _RetryDecomposition("inconsistent block dimensions")

        t_r = dagger(frame) @ t_generic @ frame
        v_first = xvecs[:, levels[0]]
        level_frames = [v_first]
        for lv in levels[1:]:
            v_j = xvecs[:, lv]
            overlap = dagger(v_j) @ t_r @ v_first  # proportional to a unitary
            smin = float(np.linalg.svd(overlap, compute_uv=False)[-1])
            if smin < 1e-8:
                raise _RetryDecomposition("degenerate level transport")
            level_frames.append(v_j @ _polar_unitary(overlap))

        w_block = np.zeros((block_dim_total, mult * n), dtype=complex)
        for b in range(mult):
            for j in range(n):
                w_block[:, b * n + j] = level_frames[j][:, b]
        w_full = frame @ w_block
        blocks.append(AlgebraBlock(multiplicity=mult, block_dim=n, isometry=w_full))

    # Every basis element must look like I_m (x) M_n in each block frame.
    for blk in blocks:
        m, n = blk.multiplicity, blk.block_dim
        for b in basis:
            c = dagger(blk.isometry) @ b @ blk.isometry
            avg = np.zeros((n, n), dtype=complex)
            for i in range(m):
                avg += c[i * n : (i + 1) * n, i * n : (i + 1) * n]
            avg /= m
            if float(np.linalg.norm(c - np.kron(np.eye(m), avg))) > max(tol, 1e-8):
                raise _RetryDecomposition("block frame does not diagonalize the algebra")
    return blocks


def algebra_structure(basis, tol: float = 1e-8, seed: int = 0) -> AlgebraStructure:
    """Decompose a star-closed matrix algebra into ``I_m (x) M_n`` blocks.

    ``basis`` must span an algebra closed under adjoints and products
    (within tolerance); commutant bases always qualify. Generic elements of
    the algebra and its center are sampled from a seeded stream and their
    joint eigenspaces split the blocks; sampling retries on the rare draw
    with accidentally degenerate spectra.
    """
    mats = [as_complex_matrix(b) for b in basis]
    if not mats:
        raise ValueError("empty basis")
    d = mats[0].shape[0]
    ortho = _orthonormalize(mats)
    for a in ortho:
        if _hs_project_residual(ortho, dagger(a)) > max(tol, 1e-8):
            raise ValueError("basis is not closed under adjoints within tolerance")
        for b in ortho:
            if _hs_project_residual(ortho, a @ b) > max(tol, 1e-8):
                raise ValueError("basis is not closed under multiplication within tolerance")

    # Restrict to the algebra's support so a non-unital algebra decomposes
    # inside the range of its own unit.
    gram = sum(b @ dagger(b) for b in ortho)
    gvals, gvecs = np.linalg.eigh((gram + dagger(gram)) / 2)
    cutoff = 1e-10 * max(1.0, float(gvals[-1]))
    support = gvecs[:, gvals > cutoff]

    rng = np.random.default_rng(seed)
    last = "no attempts"
    for _ in range(8):
        try:
            blocks = _decompose_once(rng, ortho, support, tol)
            break
        except _RetryDecomposition as exc:
            last = str(exc)
    else:
        raise RuntimeError(f"block decomposition failed to stabilize: {last}")

    blocks.sort(key=_block_order_key)
    total = sum(b.multiplicity * b.block_dim for b in blocks)
    if total > d:
        raise RuntimeError("block dimensions exceed the space dimension")
    return AlgebraStructure(basis=tuple(ortho), blocks=tuple(blocks))


def _block_order_key(blk: AlgebraBlock) -> int:
    weights = np.linalg.norm(blk.isometry, axis=1)
    significant = np.nonzero(weights > 1e-6)[0]
    return int(significant[0]) if significant.size else 0


def _require_unital(channel: KrausChannel) -> None:
    if not is_unital(channel, 1e-8):
        raise NonUnitalChannelError(
            "channel is not unital; the commutant characterization of passive "
            "and unitarily correctable codes only applies to unital channels"
        )


def find_noiseless_subsystems(channel: KrausChannel, tol: float = 1e-8, seed: int = 0) -> list[CodeReport]:
    """Passive codes of a unital channel.

    Returns one report per commutant block whose matrix factor has dimension
    at least two; one-dimensional factors hold classical labels only and are
    not reported.
    """
    _require_unital(channel)
    basis = commutant_basis(channel.kraus_ops)
    structure = algebra_structure(basis, tol=tol, seed=seed)
    d = channel.dim
    reports = []
    for blk in structure.blocks:
        if blk.block_dim < 2:
            continue
        p = blk.isometry @ dagger(blk.isometry)
        p = (p + dagger(p)) / 2
        reports.append(
            CodeReport(
                kind="DFS" if blk.multiplicity == 1 else "NS",
                dim_a=blk.block_dim,
                dim_b=blk.multiplicity,
                projector=p,
                complement=np.eye(d) - p,
                isometry=blk.isometry,
            )
        )
    return reports


def find_unitarily_correctable_codes(
    channel: KrausChannel, tol: float = 1e-8, seed: int = 0
) -> list[CodeReport]:
    """Codes recoverable by one fixed unitary applied after the channel.

    For a unital channel these are exactly the passive codes of the
    composite of the dual map with the channel itself; each report carries
    a recovery unitary built by :func:`construct_recovery`.
    """
    _require_unital(channel)
    forward_backward = compose(dual(channel), channel)
    reports = find_noiseless_subsystems(forward_backward, tol=tol, seed=seed)
    out = []
    for rep in reports:
        u = construct_recovery(channel, rep, tol=tol)
        out.append(replace(rep, kind="UCC", recovery=u))
    return out


def construct_recovery(channel: KrausChannel, code: CodeReport, tol: float = 1e-8) -> np.ndarray:
    """Canonical recovery unitary for a unitarily correctable code.

    The channel restricted to the codespace must act through a single
    effective isometry ``V`` (rank-one Choi matrix of the restriction); the
    recovery maps the image of ``V`` back onto the codespace and extends by
    a fixed unitary on the orthogonal complement. A restriction of higher
    Choi rank is rejected.
    """
    w = code.isometry
    d = channel.dim
    block = w.shape[1]
    restricted = [k @ w for k in channel.kraus_ops]
    vecs = np.array([r.reshape(-1) for r in restricted])
    choi = vecs.T @ vecs.conj()  # sum_i vec(S_i) vec(S_i)^dagger, PSD
    choi = (choi + dagger(choi)) / 2
    evals, evecs = np.linalg.eigh(choi)
    top = float(evals[-1])
    if top <= 0:
        raise NotUnitarilyCorrectableError("restricted channel vanishes on the codespace")
    if len(evals) > 1 and float(evals[-2]) > tol * top:
        raise NotUnitarilyCorrectableError(
            "restricted channel has Choi rank above one; no single recovery "
            f"isometry exists (second eigenvalue {evals[-2]:.3e})"
        )
    v = (evecs[:, -1] * np.sqrt(top)).reshape(d, block)
    gram = dagger(v) @ v
    scale = float(np.trace(gram).real) / block
    if float(np.linalg.norm(gram - scale * np.eye(block))) > max(tol, 1e-8) * scale:
        raise NotUnitarilyCorrectableError("effective Kraus operator is not proportional to an isometry")
    v = v / np.sqrt(scale)
    # Deterministic global phase: largest entry made positive real.
    idx = int(np.argmax(np.abs(v)))
    phase = v.reshape(-1)[idx]
    v = v * (phase.conjugate() / abs(phase))

    u = w @ dagger(v)
    img_comp = nullspace(dagger(v))
    code_comp = nullspace(dagger(w))
    if img_comp.shape[1]:
        u = u + code_comp @ dagger(img_comp)
    dev = float(np.abs(dagger(u) @ u - np.eye(d)).max())
    if dev > 1e-10:
        raise RuntimeError(f"constructed recovery is not unitary: deviation {dev:.3e}")
    return u


def correction_deviation(
    channel: KrausChannel,
    unitary,
    code: CodeReport,
    trials: int = 100,
    seed: int = 0,
) -> float:
    """Worst-case deviation from perfect recovery over random code states.

    Draws information-factor states from the Hilbert-Schmidt ensemble (pure
    extreme points on alternating trials), pushes them through projection,
    channel and recovery, and measures how far the result is from "original
    information state, arbitrary gauge state" in the code frame. Leakage out
    of the codespace counts toward the deviation.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    u = as_complex_matrix(unitary)
    w = code.isometry
    m, n = code.dim_b, code.dim_a
    worst = 0.0
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        pure = t % 2 == 0
        rho_a = _raw_random_density(rng, n, pure)
        sigma_b = _raw_random_density(rng, m, pure) if m > 1 else np.eye(1)
        state = w @ np.kron(sigma_b, rho_a) @ dagger(w)
        out = u @ apply_matrix(channel, state) @ dagger(u)
        in_frame = dagger(w) @ out @ w
        leak = abs(1.0 - float(np.trace(in_frame).real))
        tau_b = partial_trace(in_frame, [m, n], keep={0})
        dev = float(np.linalg.norm(in_frame - np.kron(tau_b, rho_a)))
        worst = max(worst, leak, dev)
    return worst


def verify_correction(
    channel: KrausChannel,
    unitary,
    code: CodeReport,
    trials: int = 100,
    tol: float = 1e-8,
    seed: int = 0,
) -> bool:
    """Whether ``unitary`` restores the code's information factor after the channel."""
    return correction_deviation(channel, unitary, code, trials=trials, seed=seed) <= tol


def _raw_random_density(rng, dim: int, pure: bool) -> np.ndarray:
    if pure:
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        v /= np.linalg.norm(v)
        return np.outer(v, v.conj())
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return m / np.trace(m).real
