import csv
import io
import subprocess
import sys

import pytest

from expwell.cli import EXIT_COMPUTE, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, main

STATUSES = {"ok", "precision_flagged", "failed"}


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def table(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_spectrum_csv():
    code, out, _ = run("spectrum", "--g", "1", "--n-max", "3", "--method", "asymptotic")
    assert code == EXIT_OK
    rows = table(out)
    assert [r["n"] for r in rows] == ["0", "1", "2", "3"]
    assert [r["parity"] for r in rows] == ["even", "odd"] * 2
    for r in rows:
        assert float(r["E_lo"]) < float(r["E_hi"])
        assert r["status"] in STATUSES


def test_output_is_deterministic_with_lf_endings(tmp_path):
    path = tmp_path / "s.csv"
    argv = ("spectrum", "--g2", "2", "--n-max", "2", "--method", "asymptotic")
    code, first, _ = run(*argv)
    assert run(*argv, "-o", str(path))[0] == code == EXIT_OK
    written = path.read_bytes()
    assert written.decode() == first
    assert b"\r" not in written and written.endswith(b"\n")


def test_directed_rounding_keeps_the_bracket():
    code, out, _ = run("spectrum", "--g", "1", "--n-max", "0", "--method", "asymptotic",
                       "--k-tol", "1e-14")
    row = table(out)[0]
    assert float(row["E_lo"]) < float(row["E_hi"])


def test_table1_default_reports_the_mismatch():
    code, out, err = run("table1")
    assert code == EXIT_MISMATCH
    assert "mismatch n=2" in err
    assert len(table(out)) == 3


def test_table1_asymptotic_matches():
    code, out, _ = run("table1", "--method", "asymptotic")
    assert code == EXIT_OK


@pytest.mark.parametrize("argv", [
    ("spectrum", "--g", "1", "--g2", "1"),
    ("spectrum", "--g", "-1"),
    ("spectrum", "--g", "1", "--base-bits", "512", "--max-bits", "256"),
    ("wavefunction", "--k", "2.0"),
    ("nonsense",),
])
def test_usage_errors(argv):
    assert run(*argv)[0] == EXIT_USAGE


def test_unreachable_precision_is_a_compute_error():
    code, out, err = run("spectrum", "--g", "1", "--n-max", "2", "--max-bits", "128",
                         "--target-digits", "60")
    assert code == EXIT_COMPUTE
    assert out == "" and "PrecisionExhausted" in err


def test_figure4_rows_are_consistent():
    code, out, _ = run("figure4", "--g-min", "0.5", "--g-max", "1.5", "--g-steps", "3",
                       "--n-max", "5")
    assert code == EXIT_OK
    rows = table(out)
    assert list(rows[0]) == ["g", "n", "parity", "k", "k_lo", "k_hi", "status"]
    assert {r["parity"] for r in rows} == {"odd"}
    assert len(rows) == 9
    for r in rows:
        assert float(r["k_lo"]) <= float(r["k"]) <= float(r["k_hi"])
        assert r["status"] in STATUSES


def test_wavefunction_by_level():
    code, out, _ = run("wavefunction", "--g", "1", "--n", "1", "--r-max", "1", "--step", "0.25")
    assert code == EXIT_OK
    rows = table(out)
    assert len(rows) == 5 and float(rows[0]["x"]) == 0.0


def test_check_single_criterion():
    code, out, err = run("check", "--only", "3")
    assert code == EXIT_OK
    assert "[PASS] criterion 3" in err
    assert table(out)[0]["status"] == "pass"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "expwell", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "spectrum" in proc.stdout


def test_spectrum_oracle_columns_agree():
    code, out, _ = run("spectrum", "--g", "1", "--n-max", "6", "--method", "asymptotic", "--oracle")
    assert code == EXIT_OK
    rows = table(out)
    E = [0.5 * (float(r["E_lo"]) + float(r["E_hi"])) for r in rows]
    assert all(b > a for a, b in zip(E, E[1:]))
    for r, e in zip(rows, E):
        oracle = 0.5 * (float(r["oracle_E_lo"]) + float(r["oracle_E_hi"]))
        assert abs(e - oracle) < 1e-6 * e
