"""Simulated optical bench: state preparation, noise, recovery, counting.

Models the polarization of a photon pair with |H> = |0>, |V> = |1> and
photon 1 on the most significant tensor factor. The source emits
``cos(2 theta)|HH> + sin(2 theta) e^{i phi}|VV>`` optionally mixed with
white noise; the noise channel fires a phase flip on exactly one of the two
photons per event; recovery is a phase flip on photon 2.

Circular basis convention: R = (|H> - i|V>)/sqrt(2), L = (|H> + i|V>)/sqrt(2).
The same convention feeds both count simulation and reconstruction, so end
to end results do not depend on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    DensityMatrix,
    PHASE_FLIP_FIRST,
    PHASE_FLIP_SECOND,
    anticorrelated_phase_flip,
    apply,
    apply_matrix,
)
from .linalg import kron
from .schemas import ANALYZER_LABELS, TOMOGRAPHY_SETTINGS, TomographyRecord

__all__ = [
    "AcquisitionConfig",
    "PrepParams",
    "all_setting_projectors",
    "analyzer_ket",
    "apply_correction",
    "code_state_vector",
    "derived_seed",
    "measurement_settings",
    "mixing_for_da_visibility",
    "mixing_for_self_fidelity",
    "noise_channel",
    "noise_event",
    "noise_exact",
    "prep_code_state",
    "setting_projector",
    "simulate_counts",
    "waveplate_jones",
]

_SQRT2 = np.sqrt(2.0)

_KETS = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([1.0, 1.0], dtype=complex) / _SQRT2,
    "A": np.array([1.0, -1.0], dtype=complex) / _SQRT2,
    "R": np.array([1.0, -1.0j], dtype=complex) / _SQRT2,
    "L": np.array([1.0, 1.0j], dtype=complex) / _SQRT2,
}

_NOISE = anticorrelated_phase_flip()


@dataclass(frozen=True)
class PrepParams:
    """Source settings: pump plate angle and phase in degrees, plus mixing."""

    theta_deg: float
    phi_deg: float = 0.0
    mixing: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.mixing <= 1.0:
            raise ValueError(f"mixing must lie in [0, 1], got {self.mixing}")


@dataclass(frozen=True)
class AcquisitionConfig:
    """Counting parameters for one tomography record."""

    pair_rate: float = 12000.0
    duration_per_setting: float = 5.0
    seed: int = 0
    mode: str = "exact"  # "exact" | "poisson"
    singles_rate: float | None = None

    def __post_init__(self):
        if self.pair_rate <= 0 or self.duration_per_setting <= 0:
            raise ValueError("pair_rate and duration_per_setting must be positive")
        if self.mode not in ("exact", "poisson"):
            raise ValueError(f"mode must be 'exact' or 'poisson', got {self.mode!r}")


def code_state_vector(theta_deg: float, phi_deg: float) -> np.ndarray:
    """Pure codespace ket cos(2t)|HH> + sin(2t) e^{i p}|VV>."""
    theta = np.deg2rad(theta_deg)
    phi = np.deg2rad(phi_deg)
    ket = np.zeros(4, dtype=complex)
    ket[0] = np.cos(2 * theta)
    ket[3] = np.sin(2 * theta) * np.exp(1j * phi)
    return ket


def prep_code_state(params: PrepParams) -> DensityMatrix:
    """Source output: codespace ket mixed with white noise by ``mixing``."""
    ket = code_state_vector(params.theta_deg, params.phi_deg)
    pure = np.outer(ket, ket.conj())
    mixed = (1.0 - params.mixing) * pure + params.mixing * np.eye(4) / 4.0
    return DensityMatrix(mixed)


def waveplate_jones(kind: str, angle_deg: float) -> np.ndarray:
    """Jones matrix of a wave plate at the given optic-axis angle.

    Retardance is pi for ``half`` and pi/2 for ``quarter``; at zero degrees
    a half-wave plate is exactly the phase flip diag(1, -1).
    """
    retardance = {"half": np.pi, "quarter": np.pi / 2}.get(kind)
    if retardance is None:
        raise ValueError(f"kind must be 'half' or 'quarter', got {kind!r}")
    a = np.deg2rad(angle_deg)
    c, s = np.cos(a), np.sin(a)
    rot = np.array([[c, -s], [s, c]], dtype=complex)
    ret = np.diag([1.0, np.exp(1j * retardance)])
    return rot @ ret @ rot.conj().T


def noise_channel():
    """The built-in anticorrelated phase-flip channel."""
    return _NOISE


def noise_exact(rho: DensityMatrix) -> DensityMatrix:
    """Ensemble-averaged noise: equal mixture of the two one-photon flips."""
    return apply(_NOISE, rho)


def noise_event(rng: np.random.Generator, rho: DensityMatrix) -> tuple[DensityMatrix, str]:
    """One random firing: flips photon 1 or photon 2 with equal odds."""
    if rng.random() < 0.5:
        z, which = PHASE_FLIP_FIRST, "Z1"
    else:
        z, which = PHASE_FLIP_SECOND, "Z2"
    return DensityMatrix(z @ rho.mat @ z.conj().T), which


def apply_correction(rho: DensityMatrix) -> DensityMatrix:
    """Recovery: phase flip on photon 2."""
    z = PHASE_FLIP_SECOND
    return DensityMatrix(z @ rho.mat @ z.conj().T)


def analyzer_ket(label: str) -> np.ndarray:
    return _KETS[label].copy()


def setting_projector(label_1: str, label_2: str) -> np.ndarray:
    """Two-photon projector for one analyzer setting."""
    pair = []
    for label in (label_1, label_2):
        ket = _KETS[label]
        pair.append(np.outer(ket, ket.conj()))
    return kron(pair[0], pair[1])


def measurement_settings() -> tuple[tuple[str, str], ...]:
    """The 36 analyzer label pairs in normative order."""
    return TOMOGRAPHY_SETTINGS


_PROJECTOR_STACK: np.ndarray | None = None


def all_setting_projectors() -> np.ndarray:
    """Stacked (36, 4, 4) projectors matching the canonical setting order."""
    global _PROJECTOR_STACK
    if _PROJECTOR_STACK is None:
        stack = np.stack([setting_projector(a, b) for a, b in TOMOGRAPHY_SETTINGS])
        stack.setflags(write=False)
        _PROJECTOR_STACK = stack
    return _PROJECTOR_STACK


def setting_probabilities(rho) -> np.ndarray:
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    probs = np.einsum("sij,ji->s", all_setting_projectors(), mat).real
    return np.clip(probs, 0.0, None)


def simulate_counts(rho, config: AcquisitionConfig) -> TomographyRecord:
    """Coincidence counts for all 36 settings.

    Expected counts are ``pair_rate * duration * probability``; mode
    ``exact`` rounds them, mode ``poisson`` draws from the seeded stream.
    """
    probs = setting_probabilities(rho)
    mu = config.pair_rate * config.duration_per_setting * probs
    if config.mode == "exact":
        counts = np.rint(mu).astype(int)
    else:
        rng = np.random.default_rng(config.seed)
        counts = rng.poisson(mu).astype(int)
    return TomographyRecord(
        settings=[tuple(s) for s in TOMOGRAPHY_SETTINGS],
        counts=[int(c) for c in counts],
        pair_rate=config.pair_rate,
        duration=config.duration_per_setting,
        seed=config.seed,
        mode=config.mode,
        singles_rate=config.singles_rate,
    )


def mixing_for_da_visibility(target: float, theta_deg: float = 22.5, phi_deg: float = 0.0) -> float:
    """Mixing level that hits a diagonal-basis visibility at the given prep.

    For the white-noise model the diagonal/antidiagonal visibility of the
    prepared state is ``(1 - mixing) * sin(4 theta) * cos(phi)``.
    """
    base = np.sin(np.deg2rad(4 * theta_deg)) * np.cos(np.deg2rad(phi_deg))
    if abs(base) < 1e-12:
        raise ValueError("prep settings give zero ideal visibility; cannot invert")
    mixing = 1.0 - target / base
    if not 0.0 <= mixing <= 1.0:
        raise ValueError(f"target visibility {target} needs mixing {mixing} outside [0, 1]")
    return float(mixing)


def mixing_for_self_fidelity(target: float) -> float:
    """Mixing level whose state has the given overlap with its pure target.

    The white-noise mixture has overlap ``1 - 3 m / 4`` with the underlying
    pure state, independent of the prep angles.
    """
    mixing = 4.0 * (1.0 - target) / 3.0
    if not 0.0 <= mixing <= 1.0:
        raise ValueError(f"target fidelity {target} needs mixing {mixing} outside [0, 1]")
    return float(mixing)


def derived_seed(*parts: int) -> int:
    """Deterministic child seed for independent stages and sweep points."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


# Analyzer labels re-exported for convenience.
LABELS = ANALYZER_LABELS
