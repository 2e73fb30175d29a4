"""Wire and file formats: every document the service and CLI emit or accept.

All documents are JSON with a mandatory ``schema_version`` field and round
trip exactly through their own parser. Matrices travel as nested arrays of
``[re, im]`` pairs in row-major order. The 36 tomography settings follow a
normative order: analyzer labels H, V, D, A, R, L for photon 1 in the outer
loop and photon 2 in the inner loop.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SCHEMA_VERSION = 1

ANALYZER_LABELS = ("H", "V", "D", "A", "R", "L")
TOMOGRAPHY_SETTINGS: tuple[tuple[str, str], ...] = tuple(
    (a, b) for a in ANALYZER_LABELS for b in ANALYZER_LABELS
)

MatrixDoc = list[list[tuple[float, float]]]

BUILTIN_CHANNELS = ("anticorrelated-phase-flip",)


def matrix_to_doc(a) -> MatrixDoc:
    arr = np.asarray(a, dtype=complex)
    return [[(float(x.real), float(x.imag)) for x in row] for row in arr]


def doc_to_matrix(doc: MatrixDoc) -> np.ndarray:
    rows = [[complex(re, im) for re, im in row] for row in doc]
    return np.array(rows, dtype=complex)


class _Doc(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ChannelSpec(_Doc):
    """A channel: either a named builtin or an explicit Kraus operator list."""

    schema_version: int = SCHEMA_VERSION
    builtin: Optional[str] = None
    dim: Optional[int] = Field(default=None, gt=0)
    kraus: Optional[list[MatrixDoc]] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.builtin is None) == (self.kraus is None):
            raise ValueError("provide exactly one of 'builtin' or 'kraus'")
        if self.builtin is not None and self.builtin not in BUILTIN_CHANNELS:
            raise ValueError(f"unknown builtin channel {self.builtin!r}; known: {BUILTIN_CHANNELS}")
        if self.kraus is not None and self.dim is None:
            raise ValueError("'dim' is required alongside 'kraus'")
        return self


class TomographyRecord(_Doc):
    """Coincidence counts for the 36 two-photon analyzer settings."""

    schema_version: int = SCHEMA_VERSION
    settings: list[tuple[str, str]]
    counts: list[int]
    pair_rate: float = Field(gt=0)
    duration: float = Field(gt=0)
    seed: int = 0
    mode: Literal["exact", "poisson"] = "exact"
    singles_rate: Optional[float] = None

    @field_validator("settings")
    @classmethod
    def _canonical_order(cls, v):
        if tuple(tuple(pair) for pair in v) != TOMOGRAPHY_SETTINGS:
            raise ValueError("settings must list the 36 analyzer pairs in canonical order")
        return v

    @field_validator("counts")
    @classmethod
    def _counts_shape(cls, v):
        if len(v) != len(TOMOGRAPHY_SETTINGS):
            raise ValueError(f"expected {len(TOMOGRAPHY_SETTINGS)} counts, got {len(v)}")
        if any(c < 0 for c in v):
            raise ValueError("counts must be nonnegative")
        return v


class PrepSettings(_Doc):
    """Source settings: pump plate angle, relative phase, white-noise admixture."""

    theta_deg: float
    phi_deg: float = 0.0
    mixing: float = Field(default=0.0, ge=0.0, le=1.0)


class AcquisitionSettings(_Doc):
    pair_rate: float = Field(default=12000.0, gt=0)
    duration: float = Field(default=5.0, gt=0)
    seed: int = 0
    mode: Literal["exact", "poisson"] = "exact"
    singles_rate: Optional[float] = None


class StateMetrics(_Doc):
    """Scalar state quality figures.

    ``linear_entropy`` uses the normalized d/(d-1) convention with range
    [0, 1]; the unnormalized 1 - purity value is reported alongside.
    Fidelities use the squared (Jozsa) convention.
    """

    fidelity_to_reference: Optional[float] = None
    tangle: float
    linear_entropy: float
    linear_entropy_raw: float
    visibility_hv: float
    visibility_da: float


class ConvergenceInfo(_Doc):
    iterations: int
    function_evaluations: int
    gradient_norm: float
    log_likelihood: float
    converged: bool
    warning: Optional[str] = None


class NearestCodeState(_Doc):
    """Closest pure state of the codespace family, by overlap."""

    theta_deg: float
    phi_deg: float
    overlap: float


class StateReport(_Doc):
    """Reconstruction output: state, metrics, solver diagnostics."""

    schema_version: int = SCHEMA_VERSION
    density_matrix: MatrixDoc
    metrics: StateMetrics
    convergence: ConvergenceInfo
    nearest_code_state: NearestCodeState


class StageReport(_Doc):
    label: str
    density_matrix: MatrixDoc
    metrics: StateMetrics
    convergence: ConvergenceInfo


class RunReport(_Doc):
    """Three-stage experiment: clean, after noise, after noise and recovery."""

    schema_version: int = SCHEMA_VERSION
    channel: str
    prep: PrepSettings
    acquisition: AcquisitionSettings
    stages: list[StageReport]
    fidelity_noisy_vs_initial: float
    fidelity_corrected_vs_initial: float
    warnings: list[str] = Field(default_factory=list)


class CodeReportDoc(_Doc):
    kind: Literal["DFS", "NS", "UCC"]
    dim_a: int
    dim_b: int
    projector: MatrixDoc
    complement: MatrixDoc
    recovery: Optional[MatrixDoc] = None
    candidate_checks: Optional[dict[str, bool]] = None


class DiscoverReport(_Doc):
    """Passive codes of a channel and unitarily correctable codes via its dual."""

    schema_version: int = SCHEMA_VERSION
    dim: int
    unital: bool
    passive_codes: list[CodeReportDoc]
    unitarily_correctable_codes: list[CodeReportDoc]


class SweepRow(_Doc):
    theta_deg: float
    fidelity_noisy: float
    fidelity_corrected: float
    theory: float


class SweepTable(_Doc):
    """Fidelity-versus-angle table, exportable as CSV for plotting."""

    schema_version: int = SCHEMA_VERSION
    phi_deg: float
    mixing: float
    mode: Literal["exact", "poisson"]
    seed: int
    pair_rate: float
    duration: float
    rows: list[SweepRow]


_SWEEP_COLUMNS = ("theta_deg", "fidelity_noisy", "fidelity_corrected", "theory")


def sweep_to_csv(table: SweepTable) -> str:
    """Render a sweep as comment-prefixed metadata plus CSV rows."""
    lines = [
        f"# schema_version: {table.schema_version}",
        f"# phi_deg: {table.phi_deg!r}",
        f"# mixing: {table.mixing!r}",
        f"# mode: {table.mode}",
        f"# seed: {table.seed}",
        f"# pair_rate: {table.pair_rate!r}",
        f"# duration: {table.duration!r}",
        ",".join(_SWEEP_COLUMNS),
    ]
    for row in table.rows:
        lines.append(",".join(repr(getattr(row, c)) for c in _SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"


def sweep_from_csv(text: str) -> SweepTable:
    meta: dict[str, str] = {}
    rows: list[SweepRow] = []
    header_seen = False
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
            continue
        if not header_seen:
            if tuple(line.split(",")) != _SWEEP_COLUMNS:
                raise ValueError(f"unexpected sweep header: {line!r}")
            header_seen = True
            continue
        values = line.split(",")
        if len(values) != len(_SWEEP_COLUMNS):
            raise ValueError(f"malformed sweep row: {line!r}")
        rows.append(SweepRow(**{c: float(v) for c, v in zip(_SWEEP_COLUMNS, values)}))
    if not header_seen:
        raise ValueError("sweep table has no column header")
    return SweepTable(
        schema_version=int(meta["schema_version"]),
        phi_deg=float(meta["phi_deg"]),
        mixing=float(meta["mixing"]),
        mode=meta["mode"],  # type: ignore[arg-type]
        seed=int(meta["seed"]),
        pair_rate=float(meta["pair_rate"]),
        duration=float(meta["duration"]),
        rows=rows,
    )


class DiscoverRequest(_Doc):
    channel: ChannelSpec
    tol: float = Field(default=1e-8, gt=0)


class RunRequest(_Doc):
    prep: PrepSettings
    acquisition: AcquisitionSettings = Field(default_factory=AcquisitionSettings)


class SweepRequest(_Doc):
    thetas_deg: list[float] = Field(min_length=1)
    phi_deg: float = 0.0
    mixing: float = Field(default=0.0, ge=0.0, le=1.0)
    acquisition: AcquisitionSettings = Field(default_factory=AcquisitionSettings)


class TomoRequest(_Doc):
    record: TomographyRecord
    reference_prep: Optional[PrepSettings] = None
    reference_state: Optional[MatrixDoc] = None

    @model_validator(mode="after")
    def _single_reference(self):
        if self.reference_prep is not None and self.reference_state is not None:
            raise ValueError("provide at most one of reference_prep or reference_state")
        return self
