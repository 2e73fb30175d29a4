"""HTTP surface: stateless endpoints wrapping the workbench operations.

Error payloads carry a machine-readable ``error_kind`` so clients can map
failures to exit codes: ``validation`` for semantically invalid inputs and
``non_unital`` for code-discovery requests outside the unital theory.
Schema-level problems surface as regular 422 responses.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .channels import ChannelValidationError
from .codes import NonUnitalChannelError, NotUnitarilyCorrectableError
from .schemas import (
    DiscoverReport,
    DiscoverRequest,
    RunReport,
    RunRequest,
    StateReport,
    SweepRequest,
    SweepTable,
    TomoRequest,
    doc_to_matrix,
)
from .workbench import (
    channel_from_spec,
    discover_report,
    run_report,
    sweep_table,
    tomo_report,
)
from .experiment import PrepParams, prep_code_state

app = FastAPI(
    title="ucclab",
    version=__version__,
    description="Code discovery and simulated recovery experiments for Kraus channels",
)


def _validation_error(exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail={"error_kind": "validation", "message": str(exc)})


def _non_unital_error(exc: Exception) -> HTTPException:
    return HTTPException(status_code=409, detail={"error_kind": "non_unital", "message": str(exc)})


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/discover", response_model=DiscoverReport)
def discover(request: DiscoverRequest) -> DiscoverReport:
    try:
        channel = channel_from_spec(request.channel)
    except (ChannelValidationError, ValueError) as exc:
        raise _validation_error(exc) from exc
    try:
        return discover_report(channel, tol=request.tol)
    except NonUnitalChannelError as exc:
        raise _non_unital_error(exc) from exc
    except NotUnitarilyCorrectableError as exc:
        raise _validation_error(exc) from exc


@app.post("/run", response_model=RunReport)
def run(request: RunRequest) -> RunReport:
    try:
        return run_report(request.prep, request.acquisition)
    except ValueError as exc:
        raise _validation_error(exc) from exc


@app.post("/sweep", response_model=SweepTable)
def sweep(request: SweepRequest) -> SweepTable:
    try:
        return sweep_table(
            request.thetas_deg, request.phi_deg, request.mixing, request.acquisition
        )
    except ValueError as exc:
        raise _validation_error(exc) from exc


@app.post("/tomo", response_model=StateReport)
def tomo(request: TomoRequest) -> StateReport:
    reference = None
    if request.reference_prep is not None:
        params = request.reference_prep
        reference = prep_code_state(
            PrepParams(theta_deg=params.theta_deg, phi_deg=params.phi_deg, mixing=params.mixing)
        )
    elif request.reference_state is not None:
        reference = doc_to_matrix(request.reference_state)
    try:
        return tomo_report(request.record, reference=reference)
    except ValueError as exc:
        raise _validation_error(exc) from exc
