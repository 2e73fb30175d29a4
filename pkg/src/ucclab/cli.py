"""Command-line client for the workbench service.

By default every command talks to an in-process instance of the service, so
no server is needed for batch work; pass ``--server URL`` to target a
running deployment instead. Machine-readable documents go to stdout or
``--out``; human summaries go to stderr.

Exit codes: 0 success, 2 parse error (bad files, bad arguments), 3
validation error, 4 code discovery requested for a non-unital channel.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import pydantic

from . import schemas

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NON_UNITAL = 4


class _CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _make_client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="Using `httpx` with `starlette.testclient`")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code < 400:
        return response.json()
    detail = response.json().get("detail")
    if response.status_code == 422:
        raise _CliFailure(EXIT_PARSE, f"request rejected: {detail}")
    kind = detail.get("error_kind") if isinstance(detail, dict) else None
    message = detail.get("message") if isinstance(detail, dict) else str(detail)
    if kind == "non_unital":
        raise _CliFailure(EXIT_NON_UNITAL, message)
    raise _CliFailure(EXIT_VALIDATION, message)


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise _CliFailure(EXIT_PARSE, f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _CliFailure(EXIT_PARSE, f"{path} is not valid JSON: {exc}") from exc


def _load_model(path: str, model):
    try:
        return model.model_validate(_load_json(path))
    except pydantic.ValidationError as exc:
        raise _CliFailure(EXIT_PARSE, f"{path} does not match the expected schema: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    try:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    except OSError as exc:
        raise _CliFailure(EXIT_VALIDATION, f"cannot write {out}: {exc}") from exc


def _parse_thetas(spec: str) -> list[float]:
    try:
        if ":" in spec:
            start, stop, step = (float(p) for p in spec.split(":"))
            count = int(round((stop - start) / step)) + 1
            return [float(v) for v in np.linspace(start, stop, count)]
        return [float(p) for p in spec.split(",") if p.strip()]
    except ValueError as exc:
        raise _CliFailure(EXIT_PARSE, f"cannot parse angle list {spec!r}: {exc}") from exc


def _acquisition_payload(args) -> dict:
    return {
        "pair_rate": args.rate,
        "duration": args.duration,
        "seed": args.seed,
        "mode": args.mode,
    }


def _cmd_discover(client, args) -> int:
    spec = _load_model(args.channel_spec, schemas.ChannelSpec)
    payload = {"channel": spec.model_dump(), "tol": args.tol}
    report = schemas.DiscoverReport.model_validate(_post(client, "/discover", payload))
    lines = [
        f"channel dim {report.dim}, unital: {report.unital}",
        f"passive codes (DFS/NS): {len(report.passive_codes) or 'none'}",
    ]
    for code in report.passive_codes:
        lines.append(f"  {code.kind}: dim_a={code.dim_a} dim_b={code.dim_b}")
    lines.append(f"unitarily correctable codes: {len(report.unitarily_correctable_codes) or 'none'}")
    for code in report.unitarily_correctable_codes:
        summary = f"  {code.kind}: dim_a={code.dim_a} dim_b={code.dim_b}"
        if code.candidate_checks:
            checks = ", ".join(f"{k}={'yes' if v else 'no'}" for k, v in code.candidate_checks.items())
            summary += f" (candidate recoveries: {checks})"
        lines.append(summary)
    print("\n".join(lines), file=sys.stderr)
    _emit(report.model_dump_json(indent=2), args.out)
    return EXIT_OK


def _cmd_run(client, args) -> int:
    payload = {
        "prep": {"theta_deg": args.theta, "phi_deg": args.phi, "mixing": args.mixing},
        "acquisition": _acquisition_payload(args),
    }
    report = schemas.RunReport.model_validate(_post(client, "/run", payload))
    print(
        f"theta={args.theta} phi={args.phi} mixing={args.mixing} mode={args.mode}: "
        f"F(noisy, initial)={report.fidelity_noisy_vs_initial:.4f}, "
        f"F(corrected, initial)={report.fidelity_corrected_vs_initial:.4f}",
        file=sys.stderr,
    )
    _emit(report.model_dump_json(indent=2), args.out)
    return EXIT_OK


def _cmd_sweep(client, args) -> int:
    payload = {
        "thetas_deg": _parse_thetas(args.thetas),
        "phi_deg": args.phi,
        "mixing": args.mixing,
        "acquisition": _acquisition_payload(args),
    }
    table = schemas.SweepTable.model_validate(_post(client, "/sweep", payload))
    worst = min(row.fidelity_corrected for row in table.rows)
    print(
        f"sweep over {len(table.rows)} angles ({args.mode}): "
        f"min corrected fidelity {worst:.4f}",
        file=sys.stderr,
    )
    _emit(schemas.sweep_to_csv(table), args.out)
    return EXIT_OK


def _cmd_tomo(client, args) -> int:
    record = _load_model(args.record, schemas.TomographyRecord)
    payload: dict = {"record": record.model_dump()}
    if args.reference_theta is not None and args.reference_state is not None:
        raise _CliFailure(EXIT_PARSE, "give either --reference-theta or --reference-state, not both")
    if args.reference_theta is not None:
        payload["reference_prep"] = {
            "theta_deg": args.reference_theta,
            "phi_deg": args.reference_phi,
            "mixing": args.reference_mixing,
        }
    elif args.reference_state is not None:
        payload["reference_state"] = _load_json(args.reference_state)
    report = schemas.StateReport.model_validate(_post(client, "/tomo", payload))
    near = report.nearest_code_state
    line = (
        f"nearest codespace state: theta={near.theta_deg:.2f} phi={near.phi_deg:.2f} "
        f"(overlap {near.overlap:.4f})"
    )
    if report.metrics.fidelity_to_reference is not None:
        line += f"; fidelity to reference {report.metrics.fidelity_to_reference:.4f}"
    print(line, file=sys.stderr)
    _emit(report.model_dump_json(indent=2), args.out)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ucclab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--server", default=None, help="service URL; in-process when omitted")
        p.add_argument("--out", default=None, help="write the document here instead of stdout")

    def acquisition(p):
        p.add_argument("--mode", choices=("exact", "poisson"), default="exact")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--rate", type=float, default=12000.0, help="coincidence pairs per second")
        p.add_argument("--duration", type=float, default=5.0, help="seconds per setting")

    p = sub.add_parser("discover", help="find passive and unitarily correctable codes")
    p.add_argument("channel_spec", help="channel spec JSON file")
    p.add_argument("--tol", type=float, default=1e-8)
    common(p)

    p = sub.add_parser("run", help="three-stage experiment at one prep setting")
    p.add_argument("--theta", type=float, required=True, help="pump plate angle, degrees")
    p.add_argument("--phi", type=float, default=0.0, help="relative phase, degrees")
    p.add_argument("--mixing", type=float, default=0.0)
    acquisition(p)
    common(p)

    p = sub.add_parser("sweep", help="fidelity table across prep angles")
    p.add_argument("--thetas", default="0:90:2.5", help="comma list or start:stop:step, degrees")
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--mixing", type=float, default=0.0)
    acquisition(p)
    common(p)

    p = sub.add_parser("tomo", help="reconstruct a tomography record")
    p.add_argument("record", help="tomography record JSON file")
    p.add_argument("--reference-theta", type=float, default=None)
    p.add_argument("--reference-phi", type=float, default=0.0)
    p.add_argument("--reference-mixing", type=float, default=0.0)
    p.add_argument(
        "--reference-state",
        default=None,
        help="JSON file holding a density matrix as [re, im] pairs",
    )
    common(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        client = _make_client(args.server)
        with client:
            if args.command == "discover":
                return _cmd_discover(client, args)
            if args.command == "run":
                return _cmd_run(client, args)
            if args.command == "sweep":
                return _cmd_sweep(client, args)
            if args.command == "tomo":
                return _cmd_tomo(client, args)
        raise AssertionError(f"unhandled command {args.command}")
    except _CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    raise SystemExit(main())
