import csv
import io
import json
import subprocess
import sys

import pytest

from qmeter.cli import main, write_csv


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


def reemit(text):
    rows = rows_of(text)
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


class TestCsvCommands:
    def test_pc_table(self, capsys):
        code, out = run(["pc-table", "--n-max", "4"], capsys)
        assert code == 0
        rows = rows_of(out)
        assert rows[0] == ["N", "P_S_max", "P_I_unamb"]
        assert rows[2][0] == "2"
        assert float(rows[2][1]) == pytest.approx(0.853553, abs=5e-7)
        assert float(rows[2][2]) == pytest.approx(0.5)
        assert rows[4][0] == "4" and float(rows[4][2]) == pytest.approx(0.375)
        assert reemit(out) == out

    def test_pc_curve(self, capsys):
        code, out = run(["pc-curve", "--n", "2", "--grid", "11"], capsys)
        assert code == 0
        rows = rows_of(out)
        assert rows[0] == ["a", "eta", "P_I", "P_S", "P_RS"]
        assert float(rows[-1][4]) == pytest.approx(1.0)
        assert float(rows[-1][2]) == pytest.approx(0.5)
        assert reemit(out) == out

    def test_um_curve(self, capsys):
        code, out = run(["um-curve", "--grid", "7"], capsys)
        assert code == 0
        rows = rows_of(out)
        assert rows[0] == ["P_I", "P_S", "P_RS"]
        assert len(rows) == 8
        assert [float(x) for x in rows[-1]] == pytest.approx([2 / 3, 1 / 3, 1.0], abs=1e-9)
        assert reemit(out) == out

    def test_nine_significant_digits(self):
        assert write_csv(["x"], [[1 / 3]]) == "x\n0.333333333\n"

    def test_output_file(self, tmp_path, capsys):
        target = tmp_path / "table.csv"
        assert main(["pc-table", "--n-max", "2", "-o", str(target)]) == 0
        assert capsys.readouterr().out == ""
        assert target.read_text().startswith("N,P_S_max,P_I_unamb\n")


class TestJsonCommands:
    def test_qd_check(self, capsys):
        code, out = run(["qd-check", "--d", "2", "--samples", "10", "--seed", "7"], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["p_s_estimate"] == pytest.approx(1 / 3, abs=1e-9)
        assert report["n_samples"] == 10 and report["seed"] == 7

    def test_mc(self, capsys):
        code, out = run(["mc", "--scenario", "pc", "--family", "unambiguous", "--trials", "5000", "--seed", "3"], capsys)
        assert code == 0
        report = json.loads(out)
        assert sum(report["counts"].values()) == 5000
        assert report["estimates"]["p_error"] == 0.0

    def test_mc_table(self, capsys):
        code, out = run(["mc", "--scenario", "qd", "--d", "2", "--trials", "2000", "--format", "table"], capsys)
        assert code == 0
        assert out.splitlines()[0].split()[0] == "rate"

    @pytest.mark.parametrize(
        "flags",
        [
            ["--scenario", "pc", "--n", "2", "--family", "interpolated", "--a", "0.9"],
            ["--scenario", "pc", "--n", "3", "--family", "unambiguous"],
            ["--scenario", "um", "--family", "interpolated", "--p-i", "0.5"],
            ["--scenario", "um", "--family", "deterministic"],
            ["--scenario", "qd", "--d", "3"],
        ],
    )
    def test_validate_passes(self, capsys, flags):
        code, out = run(["validate", *flags], capsys)
        assert code == 0
        result = json.loads(out)
        assert result["passed"] and result["validation"]["passed"]


class TestExitCodes:
    def test_perturbed_povm_file(self, tmp_path, capsys):
        dump = tmp_path / "povm.json"
        code, _ = run(["validate", "--scenario", "pc", "--n", "1", "--dump-povm", str(dump)], capsys)
        assert code == 0
        data = json.loads(dump.read_text())
        data["elements"][0]["operator"]["re"][0] += 1e-3
        dump.write_text(json.dumps(data))
        code, out = run(["validate", "--scenario", "pc", "--n", "1", "--povm-file", str(dump)], capsys)
        assert code == 1
        assert json.loads(out)["passed"] is False

    def test_suboptimal_but_valid_povm_fails_certificate(self, tmp_path, capsys):
        # A valid POVM that is not the scenario's optimum: validation passes, the certificate does not.
        dump = tmp_path / "povm.json"
        run(["validate", "--scenario", "pc", "--n", "2", "--family", "unambiguous", "--dump-povm", str(dump)], capsys)
        code, out = run(["validate", "--scenario", "pc", "--n", "2", "--povm-file", str(dump)], capsys)
        result = json.loads(out)
        assert code == 1
        assert result["validation"]["passed"] and not result["certificate"]["passed"]

    @pytest.mark.parametrize(
        "argv",
        [
            ["pc-table", "--bogus"],
            ["pc-table"],
            ["nope"],
            ["mc", "--scenario", "zz"],
            ["pc-table", "--n-max", "0"],
            ["validate", "--scenario", "pc", "--family", "interpolated", "--a", "1.5"],
        ],
    )
    def test_flag_errors_exit_2(self, argv, capsys):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2

    def test_console_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "qmeter", "pc-table", "--n-max", "1"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert proc.stdout == "N,P_S_max,P_I_unamb\n1,0.75,0.5\n"
        proc = subprocess.run([sys.executable, "-m", "qmeter", "--what"], capture_output=True, text=True)
        assert proc.returncode == 2
