import json
import math

import numpy as np
import pytest

from epsball.cli import (
    EXIT_DATA,
    EXIT_DEGENERATE,
    EXIT_USAGE,
    CsvParseError,
    ingest_csv,
    main,
)

@pytest.fixture()
def schema():
    jsonschema = pytest.importorskip("jsonschema")
    import importlib.resources as resources

    text = resources.files("epsball").joinpath("schemas/report.schema.json").read_text()
    doc = json.loads(text)
    return lambda payload: jsonschema.validate(payload, doc)


def _write(path, text):
    path.write_text(text)
    return str(path)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def _run_json(capsys, argv):
    code, out = _run(capsys, argv)
    assert code == 0, out
    return json.loads(out)


# ---------------------------------------------------------------- ingest_csv


def test_ingest_plain(tmp_path):
    p = _write(tmp_path / "a.csv", "0.0,1.0\n2.0,3.0\n")
    arr = ingest_csv(p)
    assert arr.tolist() == [[0.0, 1.0], [2.0, 3.0]]
    assert arr.dtype == np.float64


def test_ingest_header_skipped(tmp_path):
    p = _write(tmp_path / "a.csv", "x1,x2\n0.5,0.25\n")
    assert ingest_csv(p).tolist() == [[0.5, 0.25]]


def test_ingest_blank_lines_ignored(tmp_path):
    p = _write(tmp_path / "a.csv", "1.0\n\n2.0\n\n")
    assert ingest_csv(p).tolist() == [[1.0], [2.0]]


def test_ingest_ragged_reports_line(tmp_path):
    p = _write(tmp_path / "a.csv", "1.0,2.0\n3.0\n")
    with pytest.raises(CsvParseError, match="line 2"):
        ingest_csv(p)


def test_ingest_non_numeric_reports_line(tmp_path):
    p = _write(tmp_path / "a.csv", "1.0\nok\n2.0,oops\n")
    with pytest.raises(CsvParseError, match="line 2"):
        ingest_csv(p)


def test_ingest_empty(tmp_path):
    p = _write(tmp_path / "a.csv", "")
    assert ingest_csv(p).shape == (0, 1)


def test_ingest_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    data = rng.normal(size=(25, 3))
    p = tmp_path / "rt.csv"
    np.savetxt(p, data, delimiter=",", fmt="%.17g")
    assert np.array_equal(ingest_csv(str(p)), data)


# ------------------------------------------------------------------ commands


def test_estimate_from_files(tmp_path, capsys, schema):
    x = _write(tmp_path / "x.csv", "0.0\n0.3\n1.0\n")
    payload = _run_json(capsys, ["estimate", "--x", x, "--k", "2,0",
                                 "--epsilon", "0.5"])
    schema(payload)
    assert payload["command"] == "estimate"
    assert payload["result"]["value"] == pytest.approx(1 / 3)
    assert payload["metadata"]["n1"] == 3
    assert "interval" in payload["result"]


def test_estimate_cross_from_files(tmp_path, capsys):
    x = _write(tmp_path / "x.csv", "0.0\n")
    y = _write(tmp_path / "y.csv", "0.2\n0.9\n")
    payload = _run_json(capsys, ["estimate", "--x", x, "--y", y,
                                 "--k", "1,1", "--epsilon", "0.5"])
    assert payload["result"]["value"] == pytest.approx(0.5)
    assert "interval" not in payload["result"]  # too few points for plug-ins


def test_estimate_from_spec_deterministic(capsys, schema):
    argv = ["estimate", "--spec-x", "n(0,1)*2", "--n1", "100",
            "--seed", "5", "--k", "2,0", "--epsilon", "0.3"]
    a = _run_json(capsys, argv)
    b = _run_json(capsys, argv)
    schema(a)
    assert a == b
    assert a["metadata"]["d"] == 2


def test_divergence_d2(tmp_path, capsys, schema):
    x = _write(tmp_path / "x.csv", "0.0\n0.1\n0.2\n")
    y = _write(tmp_path / "y.csv", "10.0\n10.1\n10.2\n")
    payload = _run_json(capsys, ["divergence", "--x", x, "--y", y,
                                 "--epsilon", "0.5"])
    schema(payload)
    assert payload["result"]["value"] == pytest.approx(2.0)
    assert payload["result"]["interval"]["lo"] <= 2.0 <= payload["result"]["interval"]["hi"]


def test_divergence_rs(tmp_path, capsys):
    x = _write(tmp_path / "x.csv", "0.0\n0.1\n")
    payload = _run_json(capsys, ["divergence", "--x", x, "--y", x,
                                 "--kind", "rs", "--s", "2", "--epsilon", "0.5"])
    assert payload["result"]["value"] == pytest.approx(0.0)


def test_entropy_command(tmp_path, capsys, schema):
    x = _write(tmp_path / "x.csv", "0.0\n0.3\n1.0\n")
    payload = _run_json(capsys, ["entropy", "--x", x, "--k", "2,0",
                                 "--epsilon", "0.5"])
    schema(payload)
    assert payload["result"]["value"] == pytest.approx(math.log(3))
    assert payload["result"]["q_tilde"] == pytest.approx(1 / 3)


def test_test_command_identical(tmp_path, capsys, schema):
    x = _write(tmp_path / "x.csv", "0.0\n0.1\n0.2\n0.35\n")
    payload = _run_json(capsys, ["test", "--x", x, "--y", x, "--epsilon", "0.5"])
    schema(payload)
    assert payload["result"]["statistic"] == 0.0
    assert payload["result"]["reject"] is False


def test_test_command_degenerate_exit(tmp_path, capsys):
    x = _write(tmp_path / "x.csv", "0.0\n100.0\n200.0\n")
    y = _write(tmp_path / "y.csv", "50.0\n150.0\n250.0\n")
    code, _ = _run(capsys, ["test", "--x", x, "--y", y, "--epsilon", "0.5"])
    assert code == EXIT_DEGENERATE


def test_schedule_command(capsys, schema):
    payload = _run_json(capsys, ["schedule", "--mode", "smooth", "--c", "1.0",
                                 "--n", "10000", "--d", "2"])
    schema(payload)
    assert payload["result"]["epsilon"] == pytest.approx(0.01)


def test_schedule_invalid_alpha_usage_exit(capsys):
    code, _ = _run(capsys, ["schedule", "--mode", "alpha", "--alpha", "5",
                            "--n", "100", "--d", "1"])
    assert code == EXIT_USAGE


def test_simulate_residuals(capsys, schema):
    payload = _run_json(capsys, [
        "simulate", "--spec-x", "u(0,1)", "--spec-y", "u(0,1)",
        "--n1", "30", "--n2", "30", "--epsilon", "0.2",
        "--nsim", "5", "--seed", "3"])
    schema(payload)
    body = payload["result"]
    assert body["n_sim"] == 5
    assert len(body["residuals"]) + body["n_excluded"] == 5


def test_simulate_schedule_bandwidth(capsys):
    payload = _run_json(capsys, [
        "simulate", "--spec-x", "u(0,1)", "--spec-y", "u(0,1)",
        "--n1", "50", "--n2", "50", "--schedule", "smooth", "--c", "1.0",
        "--nsim", "3", "--seed", "1"])
    assert payload["result"]["epsilon"] == pytest.approx(0.01)


def test_simulate_calibration_mode(capsys):
    payload = _run_json(capsys, [
        "simulate", "--spec-x", "u(0,1)", "--spec-y", "u(0,1)",
        "--n1", "40", "--n2", "40", "--epsilon", "0.2", "--mode", "calibration",
        "--nsim", "10", "--seed", "2", "--level", "0.05"])
    assert 0.0 <= payload["result"]["rejection_rate"] <= 1.0


def test_csv_format_output(tmp_path, capsys):
    x = _write(tmp_path / "x.csv", "0.0\n0.3\n1.0\n")
    code, out = _run(capsys, ["estimate", "--x", x, "--k", "2,0",
                              "--epsilon", "0.5", "--format", "csv"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "key,value"
    table = dict(line.split(",", 1) for line in lines[1:])
    assert float(table["result.value"]) == pytest.approx(1 / 3)


# ---------------------------------------------------------------- exit codes


def test_missing_file_data_exit(capsys):
    code, _ = _run(capsys, ["estimate", "--x", "/nonexistent.csv",
                            "--k", "2,0", "--epsilon", "0.5"])
    assert code == EXIT_DATA


def test_malformed_csv_data_exit(tmp_path, capsys):
    x = _write(tmp_path / "x.csv", "1.0,2.0\n3.0\n")
    code, _ = _run(capsys, ["estimate", "--x", x, "--k", "2,0",
                            "--epsilon", "0.5"])
    assert code == EXIT_DATA


def test_bad_order_usage_exit(tmp_path, capsys):
    x = _write(tmp_path / "x.csv", "0.0\n1.0\n")
    code, _ = _run(capsys, ["estimate", "--x", x, "--k", "1,0",
                            "--epsilon", "0.5"])
    assert code == EXIT_USAGE


def test_missing_epsilon_argparse_error(tmp_path, capsys):
    x = _write(tmp_path / "x.csv", "0.0\n1.0\n")
    with pytest.raises(SystemExit) as exc:
        main(["estimate", "--x", x, "--k", "2,0"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_conflicting_inputs_rejected(tmp_path, capsys):
    x = _write(tmp_path / "x.csv", "0.0\n1.0\n")
    with pytest.raises(SystemExit):
        main(["estimate", "--x", x, "--spec-x", "u(0,1)", "--k", "2,0",
              "--epsilon", "0.5"])
    capsys.readouterr()


def test_console_entry_point_runs():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "epsball.cli", "schedule", "--mode", "smooth",
         "--n", "100", "--d", "1"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["epsilon"] == pytest.approx(0.01)
