import csv
import io
import json
import math

import pytest

from cpnsim.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, fmt, fmt_log_prob, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_binary_worked_example(capsys):
    code, out, _ = run(capsys, "binary", "--alpha", "0.2")
    assert code == EXIT_OK
    (row,) = table(out)
    assert float(row["dd"]) == pytest.approx(0.480, abs=1e-3)
    assert float(row["gk"]) == pytest.approx(0.415, abs=1e-3)
    assert float(row["helstrom"]) == pytest.approx(0.401, abs=1e-3)


def test_provenance_header(capsys):
    _, out, _ = run(capsys, "binary", "--alpha", "0.3", "--seed", "5")
    header = [line for line in out.splitlines() if line.startswith("#")]
    assert header[0].startswith("# tool: cpnsim")
    assert "# seed = 5" in header
    assert "# alpha = 0.3" in header


def test_sweep_null_minimum(capsys):
    code, out, _ = run(capsys, "sweep-null", "--np", "0.64", "--delta", "0.03")
    assert code == EXIT_OK
    rows = table(out)
    best = min(rows, key=lambda r: float(r["cpn"]))
    assert float(best["n_null"]) == pytest.approx(1.2, abs=0.2)


def test_outer_code_infeasible_marker(capsys):
    code, out, _ = run(capsys, "outer-code", "--stats", "ideal-dd", "--rate", "0.9")
    assert code == EXIT_INFEASIBLE
    (row,) = table(out)
    assert row["n_min"] == "inf"
    assert row["feasible"] == "false"


def test_outer_code_feasible(capsys):
    code, out, _ = run(capsys, "outer-code", "--stats", "ideal-cpn", "ideal-dd", "--rate", "0.3", "0.68")
    assert code == EXIT_OK
    rows = {(r["stats"], r["rate"]): r for r in table(out)}
    assert int(rows["ideal-dd", "0.68"]["n_min"]) > 10 * int(rows["ideal-cpn", "0.68"]["n_min"])
    assert float(rows["ideal-dd", "0.3"]["block_error"]) <= 1e-10


def test_outer_code_custom_needs_probabilities(capsys):
    code, _, err = run(capsys, "outer-code", "--stats", "custom", "--rate", "0.5")
    assert code == EXIT_CONFIG
    assert "p-err" in err


def test_bad_grid_is_config_error(capsys):
    code, _, _ = run(capsys, "helstrom", "--np-start", "2", "--np-stop", "1")
    assert code == EXIT_CONFIG


def test_bad_model_is_config_error(capsys):
    code, _, _ = run(capsys, "sweep-np", "--eta", "1.5", "--np-stop", "0.1")
    assert code == EXIT_CONFIG


def test_argparse_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep-null"])
    assert exc.value.code == EXIT_CONFIG


def test_schema(capsys):
    code, out, _ = run(capsys, "sweep-np", "--schema")
    assert code == EXIT_OK
    assert "cpn_opt_null" in json.loads(out)


def test_json_output(capsys):
    code, out, _ = run(capsys, "helstrom", "--np-start", "1", "--np-stop", "1", "--format", "json")
    doc = json.loads(out)
    assert doc["columns"] == ["n_p", "helstrom", "dd"]
    assert float(doc["rows"][0]["helstrom"]) == pytest.approx(0.0805238477282, rel=1e-11)
    assert doc["provenance"]["parameters"]["m"] == 4


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"np-start": 1.0, "np-stop": 2.0, "np-step": 0.5, "m": 2}))
    _, out, _ = run(capsys, "helstrom", "--config", str(cfg), "--m", "8")
    rows = table(out)
    assert [r["n_p"] for r in rows] == ["1", "1.5", "2"]
    assert "# m = 8" in out


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, _ = run(capsys, "helstrom", "--config", str(cfg))
    assert code == EXIT_CONFIG


def test_np_axis_scaling(capsys):
    _, out, _ = run(capsys, "helstrom", "--np-start", "1", "--np-stop", "1", "--eta", "0.4")
    assert table(out)[0]["n_p"] == "0.4"
    _, out, _ = run(capsys, "helstrom", "--np-start", "1", "--np-stop", "1", "--eta", "0.4", "--np-axis", "source")
    assert table(out)[0]["n_p"] == "1"


def test_output_file_written_atomically(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code, _, _ = run(capsys, "binary", "--alpha", "0.2", "-o", str(path))
    assert code == EXIT_OK
    assert path.read_text().startswith("# tool: cpnsim")
    assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]


def test_failed_run_leaves_no_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code, _, _ = run(capsys, "outer-code", "--stats", "nonsense", "--rate", "0.5", "-o", str(path))
    assert code == EXIT_CONFIG
    assert list(tmp_path.iterdir()) == []


def test_montecarlo_command(capsys):
    code, out, _ = run(capsys, "montecarlo", "--np", "1.25", "--frames", "2000", "--ideal")
    assert code == EXIT_OK
    rows = {(r["receiver"], r["metric"]): r for r in table(out)}
    dd = rows["dd", "hard_error"]
    assert float(dd["ci_low"]) <= float(dd["p_hat"]) <= float(dd["ci_high"])
    assert float(rows["cpn", "erasure"]["p_hat"]) == 0.0


def test_reproduce_fig3b(capsys):
    code, out, _ = run(capsys, "reproduce", "fig3b", "--null-step", "0.02")
    assert code == EXIT_OK
    best = min(table(out), key=lambda r: float(r["cpn"]))
    assert float(best["n_null"]) == pytest.approx(1.2, abs=0.2)
    assert "# delta_m = 0.03" in out


def test_reproduce_fig1c_columns(capsys):
    code, out, _ = run(capsys, "reproduce", "fig1c", "--np-stop", "1.0", "--np-step", "0.25")
    rows = table(out)
    assert list(rows[0]) == ["n_p", "dd", "cpn_exact", "cpn_opt", "cpn_opt_null", "helstrom"]
    for r in rows:
        assert float(r["helstrom"]) <= float(r["cpn_opt"]) <= float(r["cpn_exact"]) <= float(r["dd"])
    assert "# ideal = true" in out


def test_fmt():
    assert fmt(0.1234567890123456) == "0.123456789012"
    assert fmt(True) == "true"
    assert fmt(7) == "7"
    assert fmt(math.inf) == "inf"
    assert fmt_log_prob(math.log(0.25)) == "0.25"
    assert fmt_log_prob(-math.inf) == "0"
    assert fmt_log_prob(-1000.0).endswith("e-435")
    assert float(fmt_log_prob(-1000.0).replace("e-435", "")) == pytest.approx(10 ** (-1000 / math.log(10) + 435), rel=1e-9)
