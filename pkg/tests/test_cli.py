import csv
import json

import pytest

from app.cli import RunConfig, main
from conftest import channel, data, harvest
from utils.errors import InstanceParseError
from utils.trace import TRACE_COLUMNS

SINGLE = [harvest(0, 3.0), data(0, 1.0)]


def test_solve_writes_result(write_instance, tmp_path):
    out = tmp_path / "result.json"
    code = main(["solve", "--input", str(write_instance(SINGLE)), "--output", str(out), "--preset", "paper"])
    assert code == 0
    result = json.loads(out.read_text())
    assert result["verb"] == "solve"
    assert result["T"] == pytest.approx(1.0, abs=1e-3 + 1e-6)
    assert result["feasible"] is True
    row = result["schedule"][0]
    assert set(row) >= {"epoch", "start", "duration", "rate", "power", "gain"}
    assert row["rate"] == pytest.approx(1.0, abs=2e-3)
    assert result["report"]["sumt_iteration_bound"] == 34
    assert result["report"]["wall_time_s"] is not None


def test_identical_runs_are_byte_identical(write_instance, tmp_path):
    inst = str(write_instance(SINGLE))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["solve", "--input", inst, "--output", str(path), "--preset", "fast", "--no-timing"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_validate_round_trip_and_tampering(write_instance, tmp_path):
    inst = str(write_instance(SINGLE))
    out = tmp_path / "result.json"
    assert main(["solve", "--input", inst, "--output", str(out), "--preset", "fast"]) == 0
    assert main(["validate", "--input", inst, "--schedule", str(out)]) == 0

    doc = json.loads(out.read_text())
    doc["schedule"][0]["rate"] *= 1.5
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(doc))
    report = tmp_path / "check.json"
    assert main(["validate", "--input", inst, "--schedule", str(tampered), "--output", str(report)]) == 5
    assert json.loads(report.read_text())["passed"] is False


def test_validate_rejects_row_spanning_gain_drop(write_instance, tmp_path):
    inst = write_instance([harvest(0, 3.0), data(0, 1.0), channel(1, 0.25)])
    rate = 2.0 / 3.0
    doc = {
        "verb": "solve",
        "T": 1.5,
        "consumed_energy": 2.3,
        "feasible": True,
        "schedule": [
            {"epoch": 1, "start": 0.0, "duration": 1.5, "rate": rate, "power": 2.0 ** (2 * rate) - 1.0, "gain": 1.0}
        ],
    }
    forged = tmp_path / "forged.json"
    forged.write_text(json.dumps(doc))
    assert main(["validate", "--input", str(inst), "--schedule", str(forged)]) == 5


def test_min_energy_before_last_arrival(write_instance, capsys):
    inst = write_instance([harvest(0, 3.0), data(0, 1.0), data(2.0, 1.0)])
    assert main(["min-energy", "--input", str(inst), "--deadline", "1.0"]) == 3
    assert "before the last data arrival" in capsys.readouterr().err


def test_min_energy_reports_infeasible_deadline(write_instance, tmp_path):
    out = tmp_path / "me.json"
    code = main(["min-energy", "--input", str(write_instance(SINGLE)), "--deadline", "0.5",
                 "--output", str(out), "--preset", "fast"])
    assert code == 3
    assert json.loads(out.read_text())["feasible"] is False


def test_min_energy_feasible_deadline(write_instance, tmp_path):
    out = tmp_path / "me.json"
    code = main(["min-energy", "--input", str(write_instance(SINGLE)), "--deadline", "2.0",
                 "--output", str(out), "--mu0", "1", "--eta", "2"])
    assert code == 0
    result = json.loads(out.read_text())
    # 1 bit over 2 s at rate 0.5 costs g(0.5) * 2 = 2 J
    assert result["consumed_energy"] == pytest.approx(2.0, abs=1e-4)
    assert result["report"]["sumt_iterations"] == 34


def test_infeasible_instance_exit_code(write_instance):
    assert main(["solve", "--input", str(write_instance([harvest(0, 1.0), data(0, 1.0)]))]) == 3


def test_parse_errors_exit_2(tmp_path, write_instance):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", "--input", str(bad)]) == 2
    assert main(["solve", "--input", str(tmp_path / "missing.json")]) == 2
    assert main(["solve", "--input", str(write_instance([harvest(0, 1.0)]))]) == 2
    assert main(["solve", "--input", str(write_instance(SINGLE, initial_gain=-1.0, name="neg.json"))]) == 2


def test_trace_verb_writes_csv(write_instance, tmp_path):
    out = tmp_path / "traced.json"
    assert main(["trace", "--input", str(write_instance(SINGLE)), "--output", str(out), "--preset", "fast"]) == 0
    with open(tmp_path / "traced.trace.csv", newline="") as fh:
        reader = csv.DictReader(fh)
        assert tuple(reader.fieldnames) == TRACE_COLUMNS
        phases = {row["phase"] for row in reader}
    assert {"newton", "sumt", "bound", "bisect"} <= phases


def test_bandwidth_scales_rates(write_instance, tmp_path):
    out = tmp_path / "bw.json"
    inst = write_instance([harvest(0, 3.0), data(0, 1000.0)], bandwidth_hz=1000.0)
    assert main(["solve", "--input", str(inst), "--output", str(out), "--preset", "fast"]) == 0
    row = json.loads(out.read_text())["schedule"][0]
    assert row["rate_bps"] == pytest.approx(1000.0 * row["rate"])
    assert row["rate"] == pytest.approx(1.0, abs=2e-2)


def test_oracle_single_epoch(write_instance, tmp_path):
    out = tmp_path / "oracle.json"
    assert main(["oracle", "--input", str(write_instance(SINGLE)), "--output", str(out)]) == 0
    assert json.loads(out.read_text())["T"] == pytest.approx(1.0)


def test_oracle_grid_with_deadline(write_instance, tmp_path):
    out = tmp_path / "grid.json"
    argv = ["oracle", "--input", str(write_instance(SINGLE)), "--deadline", "1.0", "--output", str(out)]
    assert main(argv) == 0
    assert json.loads(out.read_text())["energy"] == pytest.approx(3.0, abs=1e-2)


def test_run_config_requires_verb_arguments(tmp_path):
    with pytest.raises(InstanceParseError):
        RunConfig(verb="min-energy", instance_path=tmp_path / "x.json")
    with pytest.raises(InstanceParseError):
        RunConfig(verb="validate", instance_path=tmp_path / "x.json")
    with pytest.raises(InstanceParseError):
        RunConfig(verb="plot", instance_path=tmp_path / "x.json")
