import subprocess
import sys

import pytest

from exactsos.cli import main

from conftest import SEC2_TEXT

PROBLEM_TEXT = f"variables: 2\nf: {SEC2_TEXT}\n"


def run_cli(*argv):
    return main(list(argv))


def test_certify_and_check_round_trip(tmp_path, capsys):
    prob = tmp_path / "sec2.prob"
    prob.write_text(PROBLEM_TEXT)
    cert = tmp_path / "sec2.cert"
    code = run_cli(
        "certify", str(prob), "--mode", "intsos", "--eps", "1",
        "--delta", "60", "--radius", "60", "--chol", "10", "-o", str(cert),
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "kind: unconstrained" in out and "max-coeff-bits" in out
    assert run_cli("check", str(prob), str(cert)) == 0


def test_certify_inline_with_inferred_vars(tmp_path):
    cert = tmp_path / "c.cert"
    assert run_cli("certify", "X1^2 + X2^2", "-o", str(cert), "-q") == 0


def test_certify_reznick_eps_notation(tmp_path, capsys):
    # 2^-k literals are accepted for --eps
    cert = tmp_path / "r.cert"
    code = run_cli(
        "certify", "X1^2 + X2^2", "--mode", "reznick", "--eps", "2^-6",
        "-o", str(cert), "-q",
    )
    assert code == 0


def test_certify_motzkin_underflow_exit_code(tmp_path):
    code = run_cli(
        "certify", "X1^4*X2^2 + X1^2*X2^4 - 3*X1^2*X2^2*X3^2 + X3^6",
        "--mode", "intsos", "--eps-floor-bits", "20",
        "-o", str(tmp_path / "m.cert"),
    )
    assert code == 3  # EpsilonUnderflow


def test_certify_non_sos_support_exit_code(tmp_path):
    code = run_cli("certify", "X1*X2", "-o", str(tmp_path / "x.cert"))
    assert code == 6


def test_certify_putinar_inline_constraints(tmp_path):
    cert = tmp_path / "p.cert"
    code = run_cli(
        "certify", "6 - X1^2 - 2*X1*X2 - 2*X2^2", "--mode", "putinar",
        "-g", "1 - X1^2", "-g", "1 - X2^2", "--eps", "1", "-o", str(cert), "-q",
    )
    assert code == 0


def test_check_tampered_weight(tmp_path):
    prob = tmp_path / "sec2.prob"
    prob.write_text(PROBLEM_TEXT)
    cert = tmp_path / "sec2.cert"
    assert run_cli("certify", str(prob), "-o", str(cert), "-q") == 0
    text = cert.read_text().splitlines()
    for i, line in enumerate(text):
        if line.startswith("term: "):
            _, _, rest = line.partition(" ")
            w, _, poly = rest.partition(";")
            text[i] = f"term: {w.strip()}/7 ; {poly.strip()}"
            break
    cert.write_text("\n".join(text) + "\n")
    assert run_cli("check", str(prob), str(cert)) == 1


def test_check_truncated_file(tmp_path):
    prob = tmp_path / "sec2.prob"
    prob.write_text(PROBLEM_TEXT)
    cert = tmp_path / "sec2.cert"
    assert run_cli("certify", str(prob), "-o", str(cert), "-q") == 0
    truncated = cert.read_text()[: len(cert.read_text()) // 3]
    cert.write_text(truncated)
    assert run_cli("check", str(prob), str(cert)) == 2


def test_bench_suite_runs_and_writes_csv(tmp_path, capsys):
    code = run_cli(
        "bench", "putinar-small", "--out-dir", str(tmp_path), "--seed", "7"
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "putinar-example" in out
    csv_path = tmp_path / "putinar-small.csv"
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "# seed=7"
    assert lines[1] == "id,n,d,mode,status,bits,seconds"
    assert any(line.startswith("putinar-example,2,2,putinar,success") for line in lines)


def test_bench_unknown_suite():
    assert run_cli("bench", "nope") == 2


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "exactsos", "certify", "X1^2", "-q", "-o", "/tmp/_e.cert"],
        capture_output=True,
    )
    assert proc.returncode == 0
