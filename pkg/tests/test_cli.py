from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from awlab.cli import fmt, load_config, main, parse_config, plan_jobs, run, to_json
from awlab.errors import ParseError, ValidationError

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "awlab" / "scenarios"

MINIMAL = """
functions:
  f: {kind: rational, zeros: [1, -2], poles: [3]}
q_values: [0.5]
phi:
  log: {family: log}
s:
  r2: {family: rpow, param: 2}
checks:
  - {check: jensen}
"""


def test_minimal_config_parses():
    cfg = parse_config(MINIMAL)
    assert list(cfg.functions) == ["f"] and cfg.checks[0]["check"] == "jensen"


def test_q_outside_disc_rejected():
    with pytest.raises(ValidationError) as exc:
        parse_config(MINIMAL.replace("[0.5]", "[1.5]"))
    assert any("0<|q|<1 violated" in p for p in exc.value.problems)


def test_pointwise_with_pow_rejected_mathematically():
    text = MINIMAL.replace("log: {family: log}", "p: {family: pow, param: 0.5}").replace(
        "{check: jensen}", "{check: pointwise_logdiff, phi: p, s: r2}"
    )
    with pytest.raises(ValidationError) as exc:
        parse_config(text)
    assert any("limsup log phi(r)/log r = 0" in p for p in exc.value.problems)


def test_all_problems_reported():
    text = MINIMAL.replace("[0.5]", "[1.5, 2.0]").replace("{check: jensen}", "{check: jensen, functions: [g]}")
    with pytest.raises(ValidationError) as exc:
        parse_config(text)
    assert len(exc.value.problems) == 3


def test_case_mismatch_rejected():
    text = MINIMAL.replace("{check: jensen}", "{check: logdiff_m, phi: log, s: r2, case: b}")
    with pytest.raises(ValidationError, match="bounded"):
        parse_config(text)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as exc:
        parse_config("functions:\n  f: [1, 2\n")
    assert exc.value.line is not None and exc.value.column is not None


def test_round_trip_bundled():
    for name in ("smoke.yaml", "broken.yaml"):
        cfg = load_config(SCENARIOS / name)
        assert parse_config(cfg.to_yaml()) == cfg


coef = st.floats(-5, 5, allow_nan=False).filter(lambda v: v != 0)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(coef, min_size=2, max_size=5),
    st.floats(0.05, 0.95),
    st.floats(-0.3, 0.3),
    st.floats(0.1, 2.0),
)
def test_round_trip_property(coeffs, qr, qi, eps):
    text = f"""
functions:
  p: {{kind: polynomial, coeffs: {coeffs}}}
q_values: ["{qr}{qi:+}j"]
epsilon: {eps}
checks:
  - {{check: jensen}}
"""
    cfg = parse_config(text)
    assert parse_config(cfg.to_yaml()) == cfg


def test_fixed_width_floats():
    assert fmt(1.0) == "1.00000000000000e+00"
    assert fmt(-0.1) == "-1.00000000000000e-01"
    assert to_json({"a": [1.5, float("inf")]}) == '{\n  "a": [1.50000000000000e+00, null]\n}'


def test_smoke_run(tmp_path):
    code = run(load_config(SCENARIOS / "smoke.yaml"), tmp_path)
    assert code == 0
    csvs = sorted(p.name for p in tmp_path.glob("nevanlinna_*.csv"))
    assert len(csvs) == 3
    report = json.loads((tmp_path / "verdicts.json").read_text())
    assert len(report["verdicts"]) >= 8 and not report["errors"]
    assert all("provenance" in v and "hypotheses" in v for v in report["verdicts"])
    lines = (tmp_path / "summary.txt").read_text().splitlines()
    assert len(lines) == len(report["verdicts"])


def test_broken_run_names_failure(tmp_path):
    code = run(load_config(SCENARIOS / "broken.yaml"), tmp_path)
    assert code == 1
    summary = (tmp_path / "summary.txt").read_text()
    assert "lemma_a holds=no" in summary


def test_empty_checks_only_tables(tmp_path):
    cfg = parse_config(MINIMAL.replace("  - {check: jensen}\n", "").replace("checks:\n", "checks: []\n"))
    assert run(cfg, tmp_path) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["nevanlinna_f.csv"]


def test_job_error_exit_two(tmp_path):
    text = MINIMAL.replace("{check: jensen}", "{check: lemma_a, x_points: [1.0], R_rule: rlogr}")
    assert run(parse_config(text), tmp_path) == 2
    assert "ERROR" in (tmp_path / "summary.txt").read_text()


def test_job_keys_sorted_and_unique():
    jobs = plan_jobs(load_config(SCENARIOS / "smoke.yaml"))
    keys = [j.key for j in jobs]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)


def test_subcommands(tmp_path, capsys):
    cfg = SCENARIOS / "smoke.yaml"
    assert main(["validate", str(cfg)]) == 0
    assert capsys.readouterr().out.startswith("ok:")
    assert main(["table", str(cfg), "--function", "poly"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "r,m,N,T,n_zeros,n_poles"
    assert main(["order", str(cfg), "--function", "rat", "--phi", "log"]) == 0
    assert "estimate=" in capsys.readouterr().out
    assert main(["table", str(cfg), "--function", "nope"]) == 2


def test_console_entry_point(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("q_values: [2]\n")
    res = subprocess.run([sys.executable, "-m", "awlab.cli", "validate", str(bad)], capture_output=True, text=True)
    assert res.returncode == 2 and "0<|q|<1 violated" in res.stderr
