import json
import math

import pytest

from treelab.experiments import (DEFAULTS, EXPERIMENTS, ExperimentReport, Row, resolve_config,
                                 run_experiment)


def test_row_comparisons():
    assert Row("e", 1, 1.0, "q", 1.04, 1.0, 0.05, comparison="rel").passed
    assert not Row("e", 1, 1.0, "q", 1.06, 1.0, 0.05, comparison="rel").passed
    assert Row("e", 1, 1.0, "q", 0.3, 1.0, 4.0, comparison="factor").passed
    assert not Row("e", 1, 1.0, "q", 0.2, 1.0, 4.0, comparison="factor").passed
    assert Row("e", 1, 1.0, "q", 0.26, 0.25, 0.03).passed
    assert Row("e", 1, 1.0, "q", 0.26).passed is None


def test_row_underpowered_monte_carlo_fails():
    # tolerance below four standard errors cannot certify anything
    assert not Row("e", 1, 1.0, "q", 0.25, 0.25, 0.03, stderr=0.01).passed
    assert Row("e", 1, 1.0, "q", 0.25, 0.25, 0.03, stderr=0.005).passed


def test_row_nonfinite_fails():
    assert not Row("e", 1, 1.0, "q", math.inf, 1.0, 0.1).passed


def test_config_validation():
    assert resolve_config("star")["n"] == 200
    with pytest.raises(ValueError):
        resolve_config("star", {"bogus": 1})
    with pytest.raises(KeyError):
        resolve_config("nope")
    assert set(EXPERIMENTS) == set(DEFAULTS)


def test_report_serialization():
    rep = run_experiment("star", {"n": 60})
    lines = rep.to_csv().splitlines()
    assert lines[0] == "experiment,n,mu,quantity,measured,predicted,tolerance,stderr,pass"
    assert len(lines) == 1 + len(rep.rows)
    doc = json.loads(rep.to_json())
    assert doc["experiment"] == "star" and doc["config"]["n"] == 60
    assert all(r["provenance"] == "exact" for r in doc["rows"])
    assert "runtime" not in doc and "runtime" not in doc["metadata"]


def test_star_experiment_passes():
    rep = run_experiment("star")
    assert rep.passed and len(rep.rows) == 3


def test_failures_listed():
    rep = ExperimentReport("x", {}, [Row("x", 1, 1.0, "a", 2.0, 1.0, 0.1),
                                     Row("x", 1, 1.0, "b", 1.0, 1.0, 0.1)])
    assert not rep.passed
    assert [r.quantity for r in rep.failures()] == ["a"]


def test_monte_carlo_rows_carry_sample_count():
    rep = run_experiment("local-ball", {"n": 300, "mu": 0.05, "samples": 2000})
    assert all(r.provenance == "monte-carlo:2000" for r in rep.rows)
    assert rep.metadata["monte_carlo"] and rep.metadata["seed"] == 0


def test_small_configs_are_reproducible():
    cfg = {"ns": [200, 400], "samples": 1500}
    a = run_experiment("width-scaling", cfg, workers=1)
    b = run_experiment("width-scaling", cfg, workers=2)
    assert a.to_csv() == b.to_csv() and a.to_json() == b.to_json()
