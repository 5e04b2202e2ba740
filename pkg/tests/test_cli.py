import csv
import json

import numpy as np
import pytest

from levy_domains import FiniteAtomic, Triplet
from levy_domains.cli import RunConfig, main
from levy_domains.errors import ConfigError


@pytest.fixture
def gauss_json(tmp_path):
    p = tmp_path / "gauss.json"
    p.write_text(json.dumps(Triplet(np.eye(1), FiniteAtomic.zero(1), np.zeros(1)).to_json()))
    return p


def test_classify_json(gauss_json, capsys):
    assert main(["--no-timestamp", "classify", "--measure", str(gauss_json),
                 "--integrand", "exp:1:1", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert {out[c] for c in ("D0", "D", "Dc", "De")} == {"Member"}
    assert {"version", "seed", "config_hash"} <= set(out["meta"])
    assert "timestamp" not in out["meta"]


def test_classify_is_deterministic_without_timestamp(gauss_json, capsys):
    args = ["--no-timestamp", "classify", "--measure", str(gauss_json), "--integrand", "invs"]
    main(args)
    a = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == a


def test_classify_exit_two_when_undetermined(tmp_path, capsys):
    from levy_domains.core import Triplet
    from levy_domains import AnalyticTail
    nu = AnalyticTail(np.array([[1.0]]), np.array([1.0]), alpha=1.5, kind="pareto")
    p = tmp_path / "m.json"
    p.write_text(json.dumps(Triplet(np.zeros((1, 1)), nu, np.array([0.3])).to_json()))
    t = tmp_path / "f.csv"
    t.write_text("0,1,1\n")
    code = main(["classify", "--measure", str(p), "--integrand", f"table:{t}"])
    out = json.loads(capsys.readouterr().out)
    want = 2 if "Undetermined" in {out[c] for c in ("D0", "D", "Dc", "De")} else 0
    assert code == want


def test_missing_measure_is_error(tmp_path, capsys):
    assert main(["classify", "--measure", str(tmp_path / "none.json"), "--integrand", "invs"]) == 1
    assert "not found" in capsys.readouterr().err


def test_bad_measure_json_reports_line(tmp_path, capsys):
    p = tmp_path / "m.json"
    p.write_text('{\n "A": [[1]],\n }')
    assert main(["classify", "--measure", str(p), "--integrand", "invs"]) == 1
    assert "line 3" in capsys.readouterr().err


def test_counterexample_verify_table(capsys):
    assert main(["counterexample", "e2", "--verify"]) == 0
    out = capsys.readouterr().out
    assert "tail_sum(65537)" in out and "FAIL" not in out


def test_counterexample_emit_loads(tmp_path, capsys):
    p = tmp_path / "mu.json"
    assert main(["counterexample", "e2", "--tilde", "--emit", str(p)]) == 0
    mu = Triplet.from_json(json.loads(p.read_text()))
    assert mu.nu.tilde


def test_simulate_csv(tmp_path, capsys):
    m = tmp_path / "mu.json"
    m.write_text(json.dumps(Triplet(np.zeros((1, 1)),
                                    FiniteAtomic(np.array([[1.0], [-1.0]]), np.array([1.0, 0.5])),
                                    np.zeros(1)).to_json()))
    out = tmp_path / "o.csv"
    code = main(["--no-timestamp", "simulate", "--measure", str(m), "--integrand", "invs",
                 "--paths", "50", "--seed", "4", "--checkpoints", "10,100", "--masks", "from-h",
                 "--csv", str(out), "--workers", "1"])
    assert code == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    rows = list(csv.DictReader(lines))
    assert list(rows[0]) == ["t", "mask", "mean", "std", "ci_lo", "ci_hi", "gamma_t"]
    assert {r["mask"] for r in rows} == {"+", "-", "0", "rest", "all"}
    assert "# seed=4" in out.read_text()


def test_verify_theorems_small(capsys):
    assert main(["verify-theorems", "--suite", "monotonicity", "--draws", "5", "--seed", "7"]) == 0
    assert "PASS de-monotone" in capsys.readouterr().out


def test_run_config_rejects_unknown_fields():
    with pytest.raises(ConfigError, match="unknown"):
        RunConfig.from_json_text('{"command": "classify", "speed": 3}')
    with pytest.raises(ConfigError, match=":1:"):
        RunConfig.from_json_text('{"command": classify}')


def test_config_file_drives_run(tmp_path, gauss_json, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "classify", "measure": str(gauss_json),
                               "integrand": "exp:1:1", "format": "human", "timestamp": False}))
    assert main(["--config", str(cfg)]) == 0
    assert capsys.readouterr().out.startswith("D0  Member")


def test_unknown_tolerance_rejected(gauss_json, capsys):
    assert main(["--tol", "speed=1", "classify", "--measure", str(gauss_json),
                 "--integrand", "invs"]) == 1
