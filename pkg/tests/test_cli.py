from __future__ import annotations

import csv
import io
import json
import math

import pytest

from anagen.cli import main, render_summary
from anagen.report import CheckReport


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def default_reports(tmp_path_factory):
    path = tmp_path_factory.mktemp("verify") / "report.json"
    code = main(["verify", "--out", str(path)])
    return code, path


def test_verify_default_fails_only_on_weak_continuity(default_reports):
    code, path = default_reports
    rows = json.loads(path.read_text())
    failed = [r["name"] for r in rows if not r["passed"]]
    assert code == 1
    assert failed == ["weak_continuity"]
    assert len(rows) > 200
    assert all(set(r) == {"name", "anchor", "inputs_digest", "residual", "tolerance", "passed"} for r in rows)
    assert all(r["anchor"] for r in rows)
    summary = path.with_name(path.name + ".summary.txt").read_text()
    assert "FAIL  weak_continuity" in summary


def test_verify_is_byte_identical(default_reports, tmp_path):
    _, first = default_reports
    second = tmp_path / "again.json"
    main(["verify", "--out", str(second)])
    assert first.read_bytes() == second.read_bytes()


def test_verify_weak_pairing_override_exits_zero(capsys, tmp_path):
    code, out, _ = _run(capsys, "verify", "--tol", "weak_pairing=1e-2", "--out", str(tmp_path / "r.json"))
    assert code == 0
    assert "0 failed" in out


def test_verify_forced_failures(capsys, tmp_path):
    path = tmp_path / "r.csv"
    code, out, _ = _run(capsys, "verify", "--tol", "kms=1e-30", "--format", "csv", "--out", str(path))
    assert code == 1
    rows = list(csv.DictReader(io.StringIO(path.read_bytes().decode())))
    assert sum(r["passed"] == "False" for r in rows) > 1
    assert path.read_bytes().count(b"\r\n") == len(rows) + 1


def test_verify_config_file_and_errors(capsys, tmp_path):
    cfg = tmp_path / "a.cfg"
    cfg.write_text("dims =\n")
    code, _, err = _run(capsys, "verify", "--config", str(cfg))
    assert code == 2 and "dims" in err
    cfg.write_text("z = 5i\n")
    code, _, err = _run(capsys, "verify", "--config", str(cfg))
    assert code == 2


def test_continue_examples(capsys):
    code, out, _ = _run(capsys, "continue", "--group", "integer[4]", "--z=-i", "--element", "delta[1]", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert rows[1]["spectral_re"] == pytest.approx(math.e, rel=1e-14)
    assert rows[-1]["discrepancy"] <= 1e-8
    code, out, _ = _run(capsys, "continue", "--group", "implemented[0, 0.5]", "--z=0", "--element", "unit[0,1]", "--format", "json")
    assert json.loads(out)[-1]["discrepancy"] <= 1e-10
    code, out, _ = _run(capsys, "continue", "--group", "corner[3]", "--z=0.5-1i", "--element", "ones")
    assert code == 0 and "discrepancy" in out


def test_continue_parse_error(capsys):
    code, _, err = _run(capsys, "continue", "--group", "integer[4", "--z=-i", "--element", "delta[1]")
    assert code == 2 and "position 9" in err
    code, _, err = _run(capsys, "continue", "--group", "integer[4]", "--z=-q", "--element", "delta[1]")
    assert code == 2 and "position" in err


def test_counterexample_table(capsys, tmp_path):
    code, out, _ = _run(capsys, "counterexample")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [int(r["n"]) for r in rows] == list(range(10, 41))
    assert all(float(r["norm_gap"]) >= 0.99 for r in rows)
    code, out, _ = _run(capsys, "counterexample", "--n-min", "2", "--n-max", "2", "--spike")
    (row,) = csv.DictReader(io.StringIO(out))
    assert all(math.isfinite(float(v)) for v in row.values())
    code, out, _ = _run(capsys, "counterexample", "--N", "1", "--format", "json")
    # one component k = 1: |e^{0} - e^{-2}| at n = 1, weighted by 2^-1 in the pairing
    (row,) = json.loads(out)
    assert code == 0 and row["n"] == 1
    assert row["norm_gap"] == pytest.approx(1 - math.exp(-2), rel=1e-14)
    assert row["weak_pairing"] == pytest.approx((1 - math.exp(-2)) / 2, rel=1e-14)
    code, _, _ = _run(capsys, "counterexample", "--n-min", "5", "--n-max", "3")
    assert code == 2


def test_demos(capsys):
    code, out, _ = _run(capsys, "demo", "list")
    names = out.split()
    assert code == 0 and "domain-gap" in names
    for name in names:
        code, out, _ = _run(capsys, "demo", name)
        assert code == 0 and out.strip()


def test_summary_color_and_no_color(monkeypatch):
    reps = [CheckReport.from_residual("a", "x", 0.0, 1.0), CheckReport.from_residual("b", "y", 2.0, 1.0)]
    plain = render_summary(reps)
    assert "\033[" not in plain and "1 passed, 1 failed" in plain
    assert "\033[32mPASS" in render_summary(reps, color=True)

    class Tty(io.StringIO):
        def isatty(self):
            return True

    from anagen import cli

    monkeypatch.setenv("NO_COLOR", "1")
    assert not cli._use_color(Tty())
    monkeypatch.delenv("NO_COLOR")
    assert cli._use_color(Tty())
