import json
import os
import subprocess
import sys

import jsonschema
import pytest

from artifact import cli
from artifact.cli import fmt15, load_schema, main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def run_json(argv, capsys, schema):
    code, out, err = run(argv, capsys)
    data = json.loads(out)
    jsonschema.validate(data, load_schema(schema))
    return code, data


def csv_rows(text):
    lines = text.strip().splitlines()
    assert lines[0] == "B,count,main_term,residual_over_B,elapsed_ms"
    return [ln.split(",") for ln in lines[1:]]


class TestCount:
    def test_bound_3(self, capsys):
        code, out, _ = run(["count", "--bundle", "2,1", "--bound", "3"], capsys)
        assert code == 0
        (row,) = csv_rows(out)
        assert row[0] == "3" and row[1] == "4"

    def test_bound_28(self, capsys):
        code, out, _ = run(["count", "--bundle", "2,1", "--bound", "2.8"], capsys)
        assert csv_rows(out)[0][1] == "0"

    def test_grid(self, capsys):
        code, out, _ = run(["count", "--bundle", "2,1", "--grid", "1000,2,8"], capsys)
        rows = csv_rows(out)
        assert len(rows) == 8
        counts = [int(r[1]) for r in rows]
        assert all(b > a for a, b in zip(counts, counts[1:]))
        bounds = [int(r[0]) for r in rows]
        assert bounds == sorted(bounds)
        for r in rows:
            B, n, main_term, resid = int(r[0]), int(r[1]), float(r[2]), float(r[3])
            assert resid == pytest.approx((n - main_term) / B, rel=1e-12)

    def test_threads_identical(self, capsys):
        outs = []
        for t in ("1", "8"):
            _, out, _ = run(["count", "--bundle", "2,1", "--grid", "1000,2,6", "--threads", t], capsys)
            outs.append([r[:4] for r in csv_rows(out)])
        assert outs[0] == outs[1]

    def test_json_schema(self, capsys):
        code, data = run_json(["count", "--bundle", "1,1", "--bound", "20", "--format", "json"], capsys, "count")
        assert data["rows"][0]["count"] == 792

    def test_atomic_output(self, tmp_path, capsys):
        path = tmp_path / "out.csv"
        path.write_text("old\n")
        code, out, _ = run(["count", "--bundle", "2,1", "--bound", "10", "--output", str(path)], capsys)
        assert code == 0 and out == ""
        assert csv_rows(path.read_text())[0][1] == "20"
        assert sorted(os.listdir(tmp_path)) == ["out.csv"]

    def test_config_and_precedence(self, tmp_path, capsys, monkeypatch):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# counting run\nbundle = 2,1\nbound = 100\nformat = json\nthreads = 2\n")
        code, data = run_json(["count", "--config", str(cfg)], capsys, "count")
        assert data["rows"][0]["count"] == 472
        code, data = run_json(["count", "--config", str(cfg), "--bound", "10"], capsys, "count")
        assert data["rows"][0]["count"] == 20
        monkeypatch.setenv("ARTIFACT_THREADS", "3")
        assert cli.resolve_threads(None) == 3
        assert cli.resolve_threads("5") == 5

    def test_radius_overflow(self, capsys):
        code, out, err = run(["count", "--bundle", "2,1", "--bound", "1e12"], capsys)
        assert code == 3
        jsonschema.validate(json.loads(err), load_schema("error"))
        assert json.loads(err)["error"] == "radius_overflow"

    @pytest.mark.parametrize("argv", [
        ["count", "--bundle", "0,1", "--bound", "3"],
        ["count", "--bundle", "2;1", "--bound", "3"],
        ["count", "--bundle", "2,1"],
        ["count", "--bundle", "2,1", "--bound", "3", "--grid", "1,2,3"],
        ["count", "--bundle", "2,1", "--bound", "3", "--threads", "0"],
        ["count", "--bundle", "2,1", "--grid", "1000,1,3"],
        ["count", "--bundle", "2,1", "--bound", "3", "--format", "xml"],
        ["eisenstein", "--s", "1.5", "--eps", "1e-20"],
        ["eisenstein", "--s", "abc"],
        ["local-int", "--p", "4", "--s", "3", "--w", "2"],
        ["nonsense"],
        [],
    ])
    def test_bad_input(self, argv, capsys):
        code, _, err = run(argv, capsys)
        assert code == 4
        jsonschema.validate(json.loads(err), load_schema("error"))


class TestVerify:
    def test_anticanonical_small_grid_runs(self, capsys):
        code, data = run_json(["verify-asymptotic", "--bundle", "2,1", "--grid", "1000,2,6",
                               "--secondary", "laurent"], capsys, "verify_asymptotic")
        assert data["slope_check"] is True
        assert code == (0 if data["pass"] else 2)

    def test_rigid(self, capsys):
        code, data = run_json(["verify-asymptotic", "--bundle", "1,1", "--grid", "125,2,4"], capsys,
                              "verify_asymptotic")
        assert data["deviations"][-1] < 0.1
        assert code == 0

    def test_non_rigid(self, capsys):
        code, data = run_json(["verify-asymptotic", "--bundle", "1,0", "--grid", "6.25,2,4",
                               "--tolerance", "0.1"], capsys, "verify_asymptotic")
        assert data["deviations"][-1] < 0.1
        assert code == 0

    def test_failure_exit_code(self, capsys):
        code, data = run_json(["verify-asymptotic", "--bundle", "2,1", "--grid", "1000,2,4",
                               "--tolerance", "1e-6"], capsys, "verify_asymptotic")
        assert data["pass"] is False and code == 2


class TestOtherCommands:
    def test_eisenstein_both(self, capsys):
        code, data = run_json(["eisenstein", "--s", "1.5", "--route", "both"], capsys, "eisenstein")
        assert code == 0 and data["abs_diff"] < data["eps"]
        assert data["value"]["re"] == pytest.approx(2.784201545330791, abs=1e-12)

    def test_eisenstein_complex(self, capsys):
        code, data = run_json(["eisenstein", "--s", "0.8,1.5", "--route", "lattice", "--eps", "1e-9"],
                              capsys, "eisenstein")
        assert code == 0 and set(data["values"]) == {"lattice"}

    def test_eisenstein_errors(self, capsys):
        code, _, err = run(["eisenstein", "--s", "0.4", "--route", "lattice"], capsys)
        assert code == 4 and json.loads(err)["error"] == "not_convergent"
        code, _, err = run(["eisenstein", "--s", "0.5", "--route", "fourier"], capsys)
        assert code == 4 and json.loads(err)["error"] == "pole"

    def test_local_int_oracle(self, capsys):
        code, data = run_json(["local-int", "--p", "2", "--s", "3", "--w", "2", "--oracle"], capsys, "local_int")
        assert data["abs_diff"] == 0 and data["closed_form"]["exact"] == "31/18"

    def test_local_int_variants(self, capsys):
        code, data = run_json(["local-int", "--p", "3", "--s", "3", "--w", "2", "--satake", "0.8,0.6",
                               "--alpha-val", "2", "--oracle"], capsys, "local_int")
        assert data["integral"] == "j_cuspidal" and data["abs_diff"] < 1e-12
        code, data = run_json(["local-int", "--p", "5", "--s", "3", "--w", "2", "--tau", "0,0.3",
                               "--oracle"], capsys, "local_int")
        assert data["integral"] == "height_integral_twisted" and data["abs_diff"] < 1e-12

    def test_peyre(self, capsys):
        code, data = run_json(["peyre", "--bundle", "1,1"], capsys, "peyre")
        assert data["c_value"] == pytest.approx(4.559453263905, abs=1e-9)

    def test_constants(self, capsys):
        code, data = run_json(["constants"], capsys, "constants")
        digits = data["C"].lstrip("-").replace(".", "").lstrip("0")
        assert len(digits) == 20
        assert data["C"].startswith("-0.98012970089018105908")
        assert float(data["laurent"]["c_minus2"]) == pytest.approx(float(data["named"]["inv_zeta3"]), abs=1e-8)

    def test_reproducible(self, capsys):
        a = run(["constants"], capsys)[1]
        b = run(["constants"], capsys)[1]
        assert a == b


def test_fmt15():
    assert fmt15(7144.0) == "7144"
    assert fmt15(1 / 3) == "0.333333333333333"
    assert fmt15(2.5e-20) == "2.5e-20"
    assert fmt15(13500000.0) == "13500000"
    assert fmt15(-0.19855811501824805) == "-0.198558115018248"
    # exact binary ties at the 16th digit go to the even neighbour
    assert fmt15(100000000000002.5) == "100000000000002"
    assert fmt15(100000000000003.5) == "100000000000004"
    assert fmt15(2.5) == "2.5"
    assert fmt15(float("nan")) == "nan"


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "artifact.cli", "count", "--bundle", "2,1", "--bound", "3"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.splitlines()[1].startswith("3,4,")
