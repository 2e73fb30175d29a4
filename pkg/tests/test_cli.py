import json

import numpy as np
import pytest

from ucclab import cli
from ucclab import experiment as ex
from ucclab.channels import PAULI_Z
from ucclab.schemas import (
    DiscoverReport,
    RunReport,
    StateReport,
    matrix_to_doc,
    sweep_from_csv,
)

from helpers import amplitude_damping


@pytest.fixture
def builtin_spec(tmp_path):
    path = tmp_path / "channel.json"
    path.write_text(json.dumps({"builtin": "anticorrelated-phase-flip"}))
    return str(path)


def test_discover_happy_path(builtin_spec, tmp_path, capsys):
    out = tmp_path / "report.json"
    rc = cli.main(["discover", builtin_spec, "--out", str(out)])
    assert rc == 0
    report = DiscoverReport.model_validate_json(out.read_text())
    assert len(report.unitarily_correctable_codes) == 2
    summary = capsys.readouterr().err
    assert "unitarily correctable codes: 2" in summary


def test_discover_bad_json_exits_2(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert cli.main(["discover", str(path)]) == 2


def test_discover_missing_file_exits_2(tmp_path):
    assert cli.main(["discover", str(tmp_path / "nope.json")]) == 2


def test_discover_schema_violation_exits_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"builtin": "unknown"}))
    assert cli.main(["discover", str(path)]) == 2


def test_discover_non_trace_preserving_exits_3(tmp_path):
    path = tmp_path / "bad_channel.json"
    path.write_text(json.dumps({"dim": 2, "kraus": [matrix_to_doc(PAULI_Z / np.sqrt(2))]}))
    assert cli.main(["discover", str(path)]) == 3


def test_discover_non_unital_exits_4(tmp_path):
    chan = amplitude_damping(0.4)
    path = tmp_path / "damping.json"
    path.write_text(json.dumps({"dim": 2, "kraus": [matrix_to_doc(k) for k in chan.kraus_ops]}))
    assert cli.main(["discover", str(path)]) == 4


def test_run_writes_report(tmp_path):
    out = tmp_path / "run.json"
    rc = cli.main(["run", "--theta", "22.5", "--out", str(out)])
    assert rc == 0
    report = RunReport.model_validate_json(out.read_text())
    assert report.fidelity_corrected_vs_initial > 1 - 1e-3
    assert report.prep.theta_deg == 22.5


def test_run_exact_mode_bit_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["run", "--theta", "35.5", "--phi", "46.5", "--out", str(a)]) == 0
    assert cli.main(["run", "--theta", "35.5", "--phi", "46.5", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_poisson_seed_reproducible(tmp_path):
    args = ["run", "--theta", "30", "--mode", "poisson", "--seed", "17"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_csv_document(tmp_path):
    out = tmp_path / "sweep.csv"
    rc = cli.main(["sweep", "--thetas", "0:90:7.5", "--out", str(out)])
    assert rc == 0
    table = sweep_from_csv(out.read_text())
    assert len(table.rows) == 13
    for row in table.rows:
        assert abs(row.fidelity_noisy - row.theory) < 1e-12


def test_sweep_default_grid_has_37_points(tmp_path):
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--out", str(out)]) == 0
    assert len(sweep_from_csv(out.read_text()).rows) == 37


def test_sweep_bad_theta_list_exits_2():
    assert cli.main(["sweep", "--thetas", "0:banana:5"]) == 2


def test_sweep_unwritable_out_exits_3(tmp_path):
    target = tmp_path / "missing_dir" / "sweep.csv"
    assert cli.main(["sweep", "--thetas", "0,45", "--out", str(target)]) == 3


def test_tomo_with_reference(tmp_path):
    rho = ex.prep_code_state(ex.PrepParams(35.5, 46.5, 0.0))
    record = ex.simulate_counts(rho, ex.AcquisitionConfig(12000.0, 5.0, 0, "exact"))
    rec_path = tmp_path / "record.json"
    rec_path.write_text(record.model_dump_json())
    out = tmp_path / "state.json"
    rc = cli.main(
        [
            "tomo",
            str(rec_path),
            "--reference-theta",
            "35.5",
            "--reference-phi",
            "46.5",
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    report = StateReport.model_validate_json(out.read_text())
    assert report.metrics.fidelity_to_reference >= 1 - 1e-6
    assert report.nearest_code_state.theta_deg == pytest.approx(35.5, abs=0.1)


def test_tomo_with_reference_state_file(tmp_path):
    rho = ex.prep_code_state(ex.PrepParams(20.0, 0.0, 0.0))
    record = ex.simulate_counts(rho, ex.AcquisitionConfig(12000.0, 5.0, 0, "exact"))
    rec_path = tmp_path / "record.json"
    rec_path.write_text(record.model_dump_json())
    ref_path = tmp_path / "reference.json"
    ref_path.write_text(json.dumps(matrix_to_doc(rho.mat)))
    out = tmp_path / "state.json"
    rc = cli.main(["tomo", str(rec_path), "--reference-state", str(ref_path), "--out", str(out)])
    assert rc == 0
    report = StateReport.model_validate_json(out.read_text())
    assert report.metrics.fidelity_to_reference >= 0.9999


def test_tomo_conflicting_references_exit_2(tmp_path):
    rho = ex.prep_code_state(ex.PrepParams(20.0, 0.0, 0.0))
    record = ex.simulate_counts(rho, ex.AcquisitionConfig(12000.0, 5.0, 0, "exact"))
    rec_path = tmp_path / "record.json"
    rec_path.write_text(record.model_dump_json())
    ref_path = tmp_path / "reference.json"
    ref_path.write_text(json.dumps(matrix_to_doc(rho.mat)))
    rc = cli.main(
        ["tomo", str(rec_path), "--reference-theta", "20", "--reference-state", str(ref_path)]
    )
    assert rc == 2


def test_tomo_malformed_record_exits_2(tmp_path):
    path = tmp_path / "record.json"
    path.write_text(json.dumps({"counts": [1, 2, 3]}))
    assert cli.main(["tomo", str(path)]) == 2


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as info:
        cli.main(["frobnicate"])
    assert info.value.code == 2


def test_stdout_document_when_no_out(builtin_spec, capsys):
    rc = cli.main(["discover", builtin_spec])
    assert rc == 0
    out = capsys.readouterr().out
    DiscoverReport.model_validate_json(out)
