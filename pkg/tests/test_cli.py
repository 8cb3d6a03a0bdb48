import csv
import io
import json
import math

import pytest

from qasymp import qfunctions
from qasymp.cli import main, parse_complex, parse_n_range


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    meta = json.loads(lines[0][2:])
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    return meta, rows


def test_parsers():
    assert parse_complex("0.5-2i") == 0.5 - 2j
    assert parse_complex("1i") == 1j
    assert parse_n_range("5..20:5") == [5, 10, 15, 20]
    assert parse_n_range("16,81,256") == [16, 81, 256]


class TestEval:
    def test_eq_matches_library(self, capsys):
        code, out, _ = run(capsys, "eval", "--fn", "eq_euler", "--q", "0.5", "--z", "1")
        assert code == 0
        _, rows = table(out)
        assert len(rows) == 1
        ref = qfunctions.eq_euler(1, 0.5)
        assert float(rows[0]["log_mag"]) == ref.log_mag

    def test_theta(self, capsys):
        _, out, _ = run(capsys, "eval", "--fn", "theta", "--idx", "3", "--v", "0", "--tau", "1i")
        assert float(table(out)[1][0]["re"]) == pytest.approx(1.086434811213308, rel=1e-14)

    def test_qpoch_empty_product(self, capsys):
        _, out, _ = run(capsys, "eval", "--fn", "qpoch", "--a", "0", "--q", "0.5", "--n", "5")
        assert float(table(out)[1][0]["re"]) == 1.0

    def test_rows_reproduce(self, capsys):
        _, out, _ = run(capsys, "eval", "--fn", "sw", "--q", "0.5", "--x", "3.5", "--n", "3..6")
        first = table(out)[1]
        for r in first:
            _, again, _ = run(capsys, "eval", "--fn", "sw", "--q", "0.5", "--x", r["x"], "--n", r["n"])
            assert table(again)[1][0] == r

    def test_json_format(self, capsys):
        _, out, _ = run(capsys, "eval", "--fn", "eta", "--tau", "1i", "--format", "json")
        doc = json.loads(out)
        assert doc["columns"][-4:] == ["log_mag", "phase", "re", "im"]
        assert doc["rows"][0]["re"] == pytest.approx(0.7682254223260566)

    def test_missing_argument_is_a_config_error(self, capsys):
        code, _, err = run(capsys, "eval", "--fn", "aq", "--q", "0.5")
        assert code == 2
        assert json.loads(err)["error"] == "ConfigError"

    def test_domain_error_maps_to_exit_2(self, capsys):
        code, _, err = run(capsys, "eval", "--fn", "qpoch", "--a", "1", "--q", "1.5")
        assert code == 2 and "message" in json.loads(err)


class TestVerify:
    def test_qexp_case1(self, capsys):
        code, out, _ = run(capsys, "verify", "--family", "qexp", "--case", "1", "--q", "0.5", "--tau", "1", "--z", "1", "--n", "5..50")
        meta, rows = table(out)
        assert code == 0 and len(rows) == 46
        assert all(r["satisfied"] == "true" for r in rows)
        assert meta["summary"]["satisfied"] == 46

    def test_sw_crt(self, capsys):
        code, out, _ = run(capsys, "verify", "--family", "sw", "--case", "4", "--tau=-0.5", "--theta", "0", "--q", "0.5", "--u", "0.05", "--lam", "1/2")
        _, rows = table(out)
        assert code == 0 and len(rows) == 5
        assert all(int(r["n"]) % 2 == 1 and r["status"] == "satisfied" for r in rows)

    def test_small_n(self, capsys):
        # n = 1 lies below the stated range; n = 2 already meets its bound
        code, out, _ = run(capsys, "verify", "--family", "qexp", "--case", "1", "--n", "1..2")
        _, rows = table(out)
        assert code == 0
        assert rows[0]["status"] == "not_yet_asymptotic" and rows[0]["satisfied"] == ""
        assert rows[1]["status"] == "satisfied"

    def test_violation_exit_code(self, capsys):
        code, out, err = run(capsys, "verify", "--family", "sw", "--case", "1", "--tau", "1", "--n", "8..10")
        assert code == 3
        assert json.loads(err)["error"] == "VerificationFailed"
        assert table(out)[0]["summary"]["violated"] == 3

    def test_bad_case(self, capsys):
        code, _, _ = run(capsys, "verify", "--family", "qexp", "--case", "9")
        assert code == 2

    def test_deterministic_across_workers(self, capsys):
        args = ["verify", "--family", "im", "--case", "4", "--tau=-1/4", "--lam", "1/4", "--q", "0.3", "--u", "0.1"]
        _, one, _ = run(capsys, *args, "--jobs", "1")
        _, four, _ = run(capsys, *args, "--jobs", "4")
        assert one == four

    def test_config_file_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"family": "rf", "case": 1, "q": 0.3, "tau": "1", "n": "2..4"}))
        _, out, _ = run(capsys, "verify", "--config", str(cfg), "--q", "0.5")
        meta, rows = table(out)
        assert meta["q"] == 0.5 and [r["n"] for r in rows] == ["2", "3", "4"]
        cfg.write_text(json.dumps({"colour": "red"}))
        code, _, _ = run(capsys, "verify", "--config", str(cfg))
        assert code == 2

    def test_output_file(self, capsys, tmp_path):
        dest = tmp_path / "out.csv"
        run(capsys, "verify", "--family", "qexp", "--case", "1", "--n", "3", "-o", str(dest))
        assert dest.read_bytes().count(b"\r") == 0
        assert table(dest.read_text())[1][0]["n"] == "3"


class TestScan:
    def test_admissible(self, capsys):
        _, out, _ = run(capsys, "scan", "--theta", "sqrt2", "--n-max", "200")
        ns = {int(r["n"]) for r in table(out)[1]}
        assert {1, 2, 5, 12, 29, 70, 169} <= ns

    def test_joint(self, capsys):
        _, out, _ = run(capsys, "scan", "--mode", "joint", "--tau=-1/2", "--theta", "1/3", "--beta1", "1/2", "--beta2", "1/3", "--n-max", "30")
        assert [int(r["n"]) for r in table(out)[1]] == [1, 7, 13, 19, 25]

    def test_crt(self, capsys):
        _, out, _ = run(capsys, "scan", "--mode", "crt", "--tau=-1/2", "--theta", "1/3", "--lam", "1/2", "--lam1", "1/3", "--count", "3")
        meta, rows = table(out)
        assert (meta["n0"], meta["L"]) == (1, 6)
        assert [int(r["n"]) for r in rows] == [1, 7, 13]

    def test_crt_no_solution(self, capsys):
        code, _, err = run(capsys, "scan", "--mode", "crt", "--tau=-1/2", "--theta", "1/4", "--lam", "1/2", "--lam1", "1/2")
        assert code == 2 and json.loads(err)["error"] == "NoSolution"


class TestSweepAndOrtho:
    def test_sweep(self, capsys):
        code, out, _ = run(capsys, "sweep", "--family", "qexp", "--case", "1", "--tau", "1", "--n", "16,81,256", "--jobs", "1")
        meta, rows = table(out)
        assert code == 0 and len(rows) == 3
        assert meta["fitted_C"] == max(float(r["ratio"]) for r in rows)

    def test_sweep_threshold(self, capsys):
        code, _, _ = run(capsys, "sweep", "--family", "qexp", "--case", "1", "--tau", "1", "--n", "16", "--max-c", "0.01")
        assert code == 3

    @pytest.mark.parametrize("fam", ["im", "sw"])
    def test_ortho(self, capsys, fam):
        code, out, _ = run(capsys, "ortho", "--family", fam, "--q", "0.5", "--size", "4")
        meta, rows = table(out)
        assert code == 0 and len(rows) == 16
        assert meta["worst"] <= 1e-6
        diag = {int(r["n"]): float(r["target"]) for r in rows if r["m"] == r["n"]}
        if fam == "im":
            assert diag[2] == pytest.approx(0.5**-3 * 0.5 * 0.75)
        else:
            assert diag[2] == pytest.approx(0.5**-2 / (0.5 * 0.75))
        assert all(math.isfinite(float(r["value"])) for r in rows)
