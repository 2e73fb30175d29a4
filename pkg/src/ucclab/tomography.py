"""State reconstruction from counts and the standard two-qubit state metrics.

Reconstruction runs in two stages: a least-squares linear inversion over the
Hermitian unit-trace affine space seeds a maximum-likelihood refinement in
the Cholesky-style parameterization rho(t) = T(t)^dag T(t) / tr, which keeps
the iterate physical by construction. The default objective is the exact
Poisson negative log-likelihood (per expected pair, so the gradient stop is
scale free); the Gaussian approximation is selectable for cross checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky as _cholesky
from scipy.optimize import minimize

from .channels import DensityMatrix, PAULI_X, PAULI_Y, PAULI_Z
from .experiment import all_setting_projectors, setting_projector
from .linalg import sqrt_psd
from .schemas import TomographyRecord

__all__ = [
    "ReconstructionOptions",
    "ReconstructionResult",
    "estimate_pair_flux",
    "fidelity",
    "linear_entropy",
    "linear_inversion",
    "mle_reconstruct",
    "tangle",
    "visibility",
]

_DIM = 4
_N_PARAMS = 16
_LOWER_OFFDIAG = ((1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2))


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.mat
    return np.asarray(rho, dtype=complex)


# ---------------------------------------------------------------------------
# linear inversion


def _pauli_basis() -> np.ndarray:
    paulis = [np.eye(2, dtype=complex), PAULI_X, PAULI_Y, PAULI_Z]
    return np.stack([np.kron(a, b) / 2.0 for a in paulis for b in paulis])


_PAULI_STACK = _pauli_basis()


def _resolve_flux(record: TomographyRecord, normalization) -> float:
    if normalization is None:
        return float(record.pair_rate * record.duration)
    if normalization == "estimate":
        return estimate_pair_flux(record)
    return float(normalization)


def estimate_pair_flux(record: TomographyRecord) -> float:
    """Pairs per setting estimated from the nine complete local basis pairs.

    Each analyzer basis pair (one of H/V, D/A, R/L per photon) resolves every
    photon pair, so its four settings sum to the total flux.
    """
    counts = np.asarray(record.counts, dtype=float).reshape(6, 6)
    sums = []
    for i in (0, 2, 4):
        for j in (0, 2, 4):
            sums.append(counts[i : i + 2, j : j + 2].sum())
    return float(np.mean(sums))


def linear_inversion(record: TomographyRecord, normalization=None) -> np.ndarray:
    """Least-squares Hermitian unit-trace solution of the count equations.

    The output may carry small negative eigenvalues under shot noise; it is
    the seed for :func:`mle_reconstruct`, not a physical state.
    """
    projs = all_setting_projectors()
    design = np.einsum("sij,kji->sk", projs, _PAULI_STACK).real
    rank = np.linalg.matrix_rank(design)
    if rank < _N_PARAMS:
        raise ValueError(f"settings are informationally incomplete (rank {rank})")
    flux = _resolve_flux(record, normalization)
    freqs = np.asarray(record.counts, dtype=float) / flux
    rhs = freqs - design[:, 0] * 0.5  # identity coefficient fixed by unit trace
    sol, *_ = np.linalg.lstsq(design[:, 1:], rhs, rcond=None)
    coeffs = np.concatenate([[0.5], sol])
    rho = np.einsum("k,kij->ij", coeffs, _PAULI_STACK)
    return (rho + rho.conj().T) / 2


# ---------------------------------------------------------------------------
# maximum likelihood


@dataclass(frozen=True)
class ReconstructionOptions:
    likelihood: str = "poisson"  # "poisson" | "gaussian"
    gradient_tol: float = 1e-8
    max_evaluations: int = 10_000
    starts: int = 3  # inversion seed, maximally mixed, random
    seed: int = 0


@dataclass(frozen=True)
class ReconstructionResult:
    state: DensityMatrix
    converged: bool
    iterations: int
    function_evaluations: int
    gradient_norm: float
    log_likelihood: float  # Poisson log-likelihood up to the count factorials
    warning: str | None = None


def _t_to_lower(t: np.ndarray) -> np.ndarray:
    m = np.zeros((_DIM, _DIM), dtype=complex)
    m[np.diag_indices(_DIM)] = t[:_DIM]
    for k, (r, c) in enumerate(_LOWER_OFFDIAG):
        m[r, c] = t[_DIM + 2 * k] + 1j * t[_DIM + 2 * k + 1]
    return m


def _lower_to_t(m: np.ndarray) -> np.ndarray:
    t = np.zeros(_N_PARAMS)
    t[:_DIM] = m.diagonal().real
    for k, (r, c) in enumerate(_LOWER_OFFDIAG):
        t[_DIM + 2 * k] = m[r, c].real
        t[_DIM + 2 * k + 1] = m[r, c].imag
    return t


def _params_from_density(rho: np.ndarray, jitter: float = 1e-10) -> np.ndarray:
    """Lower-triangular T with T^dag T proportional to rho, via a flipped Cholesky."""
    flip = np.eye(_DIM)[::-1]
    flipped = flip @ rho @ flip
    flipped = (flipped + flipped.conj().T) / 2 + jitter * np.eye(_DIM)
    upper = _cholesky(flipped, lower=False)  # flipped = upper^dag upper
    return _lower_to_t(flip @ upper @ flip)


def _density_from_params(t: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    lower = _t_to_lower(t)
    gram = lower.conj().T @ lower
    tau = float(np.trace(gram).real)
    return gram / tau, lower, tau


def _nll_and_grad(t, projs, counts, flux, likelihood):
    rho, lower, tau = _density_from_params(t)
    probs = np.einsum("sij,ji->s", projs, rho).real
    probs = np.maximum(probs, 1e-15)
    mu = flux * probs
    if likelihood == "poisson":
        nll = float((mu - counts * np.log(mu)).sum()) / flux
        weights = 1.0 - counts / mu
    else:
        nll = float(((mu - counts) ** 2 / (2.0 * mu)).sum()) / flux
        weights = 0.5 * (1.0 - (counts / mu) ** 2)
    sens = np.einsum("s,sij->ij", weights, projs)  # d nll / d rho, Hermitian
    shifted = lower @ sens - float(np.trace(rho @ sens).real) * lower
    grad = np.zeros(_N_PARAMS)
    grad[:_DIM] = (2.0 / tau) * shifted.diagonal().real
    for k, (r, c) in enumerate(_LOWER_OFFDIAG):
        grad[_DIM + 2 * k] = (2.0 / tau) * shifted[r, c].real
        grad[_DIM + 2 * k + 1] = (2.0 / tau) * shifted[r, c].imag
    return nll, grad


def _psd_projected(rho: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    vals = np.clip(vals, 0.0, None)
    total = vals.sum()
    if total <= 0:
        return np.eye(_DIM) / _DIM
    out = (vecs * (vals / total)) @ vecs.conj().T
    return (out + out.conj().T) / 2


def mle_reconstruct(
    record: TomographyRecord,
    options: ReconstructionOptions | None = None,
    normalization=None,
) -> ReconstructionResult:
    """Maximum-likelihood state estimate from a tomography record.

    Runs up to ``options.starts`` local ascents (linear-inversion seed,
    maximally mixed, random) and keeps the best likelihood. Never fails on
    non-convergence; the result carries a warning and the final gradient
    norm instead.
    """
    opts = options or ReconstructionOptions()
    if opts.likelihood not in ("poisson", "gaussian"):
        raise ValueError(f"unknown likelihood {opts.likelihood!r}")
    projs = np.asarray(all_setting_projectors())
    counts = np.asarray(record.counts, dtype=float)
    flux = _resolve_flux(record, normalization)

    seed_state = _psd_projected(linear_inversion(record, normalization=normalization))
    starts = [_params_from_density(seed_state)]
    if opts.starts >= 2:
        starts.append(_params_from_density(np.eye(_DIM) / _DIM))
    rng = np.random.default_rng(opts.seed)
    while len(starts) < opts.starts:
        starts.append(rng.normal(scale=0.5, size=_N_PARAMS))

    best = None
    total_evals = 0
    for t0 in starts:
        res = minimize(
            _nll_and_grad,
            t0,
            args=(projs, counts, flux, opts.likelihood),
            method="L-BFGS-B",
            jac=True,
            options={
                "maxfun": opts.max_evaluations,
                "maxiter": opts.max_evaluations,
                "gtol": opts.gradient_tol,
                "ftol": 1e-14,
            },
        )
        total_evals += int(res.nfev)
        if best is None or res.fun < best.fun:
            best = res

    rho, _, _ = _density_from_params(best.x)
    _, grad = _nll_and_grad(best.x, projs, counts, flux, opts.likelihood)
    grad_norm = float(np.linalg.norm(grad))
    converged = grad_norm <= 10 * opts.gradient_tol
    warning = None
    if not converged:
        warning = f"optimizer stopped with gradient norm {grad_norm:.3e}"
    probs = np.maximum(np.einsum("sij,ji->s", projs, rho).real, 1e-300)
    mu = flux * probs
    loglike = float((counts * np.log(mu) - mu).sum())
    return ReconstructionResult(
        state=DensityMatrix(rho),
        converged=converged,
        iterations=int(best.nit),
        function_evaluations=total_evals,
        gradient_norm=grad_norm,
        log_likelihood=loglike,
        warning=warning,
    )


# ---------------------------------------------------------------------------
# metrics


def fidelity(rho, sigma) -> float:
    """Squared (Jozsa) mixed-state fidelity, clipped to [0, 1].

    Computed as the squared trace norm of sqrt(sigma) sqrt(rho), whose
    singular values carry absolute (not square-root) floating-point
    accuracy; the eigenvalue route through sqrt(sqrt(rho) sigma sqrt(rho))
    loses half the digits on nearly pure states.
    """
    r = _as_matrix(rho)
    s = _as_matrix(sigma)
    if r.shape != s.shape:
        raise ValueError(f"state dimensions differ: {r.shape} vs {s.shape}")
    singulars = np.linalg.svd(sqrt_psd(s) @ sqrt_psd(r), compute_uv=False)
    f = float(singulars.sum()) ** 2
    return float(np.clip(f, 0.0, 1.0))


def tangle(rho) -> float:
    """Squared two-qubit concurrence via the spin-flipped spectrum."""
    r = _as_matrix(rho)
    if r.shape != (4, 4):
        raise ValueError("tangle is defined for two-qubit states")
    yy = np.kron(PAULI_Y, PAULI_Y)
    flipped = r @ yy @ r.conj() @ yy
    vals = np.linalg.eigvals(flipped).real
    # Round-off eigenvalues would blow up from eps to sqrt(eps) under the
    # square root, so zero everything at the noise floor first.
    floor = 100 * np.finfo(float).eps * max(float(vals.max()), 0.0)
    lams = np.sqrt(np.where(vals > floor, vals, 0.0))
    lams[::-1].sort()
    c = max(0.0, lams[0] - lams[1] - lams[2] - lams[3])
    return float(np.clip(c * c, 0.0, 1.0))


def linear_entropy(rho, normalized: bool = True) -> float:
    """Mixedness 1 - purity, scaled by d/(d-1) to range [0, 1] when normalized."""
    r = _as_matrix(rho)
    d = r.shape[0]
    raw = 1.0 - float(np.trace(r @ r).real)
    if not normalized:
        return raw
    return float(d / (d - 1)) * raw


def visibility(rho, basis: str) -> float:
    """Two-photon correlation contrast in a local basis pair ("HV" or "DA")."""
    labels = {"HV": ("H", "V"), "DA": ("D", "A")}.get(basis)
    if labels is None:
        raise ValueError(f"basis must be 'HV' or 'DA', got {basis!r}")
    r = _as_matrix(rho)
    x, y = labels
    p = {
        (a, b): float(np.trace(r @ setting_projector(a, b)).real)
        for a in (x, y)
        for b in (x, y)
    }
    corr = p[(x, x)] + p[(y, y)]
    anti = p[(x, y)] + p[(y, x)]
    return (corr - anti) / (corr + anti)
