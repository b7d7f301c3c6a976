import csv
import io
import json

import pytest

from qsmoments import asymptotics
from qsmoments.cli import OutputTable, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_csv(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    return rows[0], rows[1:]


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    assert code == 0
    return json.loads(out)


class TestDist:
    def test_three(self, capsys):
        header, rows = run_csv(capsys, "dist", "--n", "3")
        assert header == ["k", "count", "probability"]
        assert rows == [["2", "2", "1/3"], ["3", "4", "2/3"]]

    def test_one(self, capsys):
        _, rows = run_csv(capsys, "dist", "--n", "1")
        assert rows == [["0", "1", "1"]]

    def test_json(self, capsys):
        doc = run_json(capsys, "dist", "--n", "4")
        assert {r[0]: r[1] for r in doc["rows"]} == {4: 12, 5: 4, 6: 8}
        assert doc["meta"]["mode"] == "exact"

    def test_negative_n(self, capsys):
        code, _, err = run(capsys, "dist", "--n", "-1")
        assert code == 2 and "error" in err


class TestMoments:
    def test_mean(self, capsys):
        _, rows = run_csv(capsys, "moments", "--n-max", "4", "--s-max", "1")
        assert rows[-1][:3] == ["4", "1", "29/6"]

    def test_small_n_zero(self, capsys):
        _, rows = run_csv(capsys, "moments", "--n-max", "3", "--s-max", "3")
        assert all(r[2] == "0" for r in rows if r[0] == "1")

    def test_variance(self, capsys):
        header, rows = run_csv(capsys, "moments", "--n-max", "3", "--s-max", "2")
        row = [r for r in rows if r[0] == "3" and r[1] == "2"][0]
        assert row[header.index("variance")] == "2/9"
        assert row[header.index("raw_moment")] == "22/3"

    def test_float_mode_flagged(self, capsys):
        doc = run_json(capsys, "moments", "--n-max", "4", "--s-max", "1", "--mode", "float")
        assert doc["meta"]["mode"] == "float"
        assert float(doc["rows"][-1][2]) == pytest.approx(29 / 6, rel=1e-15)

    def test_bad_bounds(self, capsys):
        assert run(capsys, "moments", "--n-max", "3", "--s-max", "0")[0] == 2


class TestSeries:
    def test_first(self, capsys):
        _, rows = run_csv(capsys, "series", "--s", "1", "--order", "4")
        assert [r[1] for r in rows] == ["0", "0", "1", "8/3", "29/6"]


class TestCompare:
    def test_relative_error_decreases(self, capsys):
        header, rows = run_csv(capsys, "compare", "--s", "1", "--grid", "100,1000,10000", "--mode", "float")
        errs = [float(r[header.index("relative_error")]) for r in rows]
        assert errs[0] > errs[1] > errs[2]

    def test_exact_mode_single(self, capsys):
        header, rows = run_csv(capsys, "compare", "--s", "1", "--grid", "1000")
        err = float(rows[0][header.index("relative_error")])
        assert 1e-3 < err < 2e-3
        assert "/" in rows[0][header.index("factorial_moment")]

    def test_empty_grid(self, capsys):
        header, rows = run_csv(capsys, "compare", "--s", "1", "--grid", "")
        assert rows == [] and header[0] == "n"

    def test_bad_grid(self, capsys):
        assert run(capsys, "compare", "--s", "1", "--grid", "1,100")[0] == 2
        assert run(capsys, "compare", "--s", "1", "--grid", "ten")[0] == 2


class TestTransfer:
    def test_alpha2_beta1(self, capsys):
        _, rows = run_csv(capsys, "transfer", "--alpha", "2", "--beta", "1", "--n", "2000", "--k", "1")
        assert float(rows[-1][3]) <= 0.005

    def test_trivial(self, capsys):
        _, rows = run_csv(capsys, "transfer", "--alpha", "1", "--beta", "0", "--n", "10")
        assert len(rows) == 1
        k, approx, exact, err = rows[0]
        assert exact == "1" and float(approx) == 1 and float(err) == 0

    def test_depth_improves(self, capsys):
        _, rows = run_csv(capsys, "transfer", "--alpha", "3", "--beta", "2", "--n", "1000", "--k", "2")
        assert float(rows[2][3]) < float(rows[0][3])

    def test_k_beyond_beta(self, capsys):
        code, _, err = run(capsys, "transfer", "--alpha", "2", "--beta", "1", "--n", "100", "--k", "2")
        assert code == 2 and "vanish" in err


class TestSimulate:
    def test_forced(self, capsys):
        header, rows = run_csv(capsys, "simulate", "--n", "2", "--trials", "10", "--seed", "7")
        row = dict(zip(header, rows[0]))
        assert float(row["mean"]) == 1 and float(row["variance"]) == 0

    def test_small_z(self, capsys):
        header, rows = run_csv(capsys, "simulate", "--n", "3", "--trials", "60000", "--seed", "1")
        row = dict(zip(header, rows[0]))
        assert row["exact_1"] == "8/3"
        assert abs(float(row["z_1"])) <= 5

    def test_meta(self, capsys):
        doc = run_json(capsys, "simulate", "--n", "5", "--trials", "100", "--seed", "3")
        assert doc["meta"]["seed"] == 3 and doc["meta"]["rng_id"]

    def test_bad_trials(self, capsys):
        assert run(capsys, "simulate", "--n", "5", "--trials", "0")[0] == 2


class TestSelftest:
    def test_passes(self, capsys):
        code, out, _ = run(capsys, "selftest")
        assert code == 0
        assert "FAIL" not in out

    def test_deterministic(self, capsys):
        assert run(capsys, "selftest") == run(capsys, "selftest")

    def test_fault_injection(self, capsys, monkeypatch):
        monkeypatch.setitem(asymptotics.ZETA, 2, "1.6449")
        code, out, err = run(capsys, "selftest")
        assert code == 1
        assert "C_k finite-difference check" in err
        assert "C_k finite-difference check,FAIL" in out


class TestOutput:
    @pytest.mark.parametrize(
        "argv",
        [
            ("dist", "--n", "5"),
            ("moments", "--n-max", "6", "--s-max", "3"),
            ("compare", "--s", "2", "--grid", "10,50", "--mode", "float"),
            ("transfer", "--alpha", "3", "--beta", "2", "--n", "300"),
        ],
    )
    def test_csv_json_agree(self, capsys, argv):
        header, rows = run_csv(capsys, *argv)
        doc = run_json(capsys, *argv)
        assert doc["columns"] == header
        assert [["" if c is None else str(c) for c in r] for r in doc["rows"]] == rows

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "d.csv"
        code, out, _ = run(capsys, "dist", "--n", "3", "--out", str(path))
        assert code == 0 and out == ""
        assert path.read_text().splitlines()[0] == "k,count,probability"

    def test_unknown_flag(self, capsys):
        assert run(capsys, "dist", "--n", "3", "--bogus")[0] == 2

    def test_missing_command(self, capsys):
        assert run(capsys)[0] == 2

    def test_row_length_enforced(self):
        table = OutputTable(["a", "b"])
        with pytest.raises(Exception):
            table.add(1)
