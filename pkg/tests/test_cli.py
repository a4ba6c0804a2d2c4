import io
import json

import pytest

from treelab.cli import main


def run(argv):
    out = io.StringIO()
    rc = main(argv, out=out)
    return rc, out.getvalue()


def test_count_values():
    assert run(["count", "--n", "4", "--m", "3"]) == (0, "H(4,3)=4\n")
    assert run(["count", "--n", "4", "--h", "2"]) == (0, "E(4,2)=3\n")
    rc, text = run(["count", "--catalan", "10"])
    assert rc == 0 and "16796" in text


def test_count_log_backend():
    rc, text = run(["count", "--n", "5000", "--m", "12", "--backend", "log"])
    assert rc == 0 and text.startswith("H(5000,12)~10^")


def test_verify_tree():
    rc, text = run(["count", "--verify-tree", "(()())"])
    assert rc == 0
    assert "size=3" in text and "height=1" in text and "width=2" in text


def test_zfun_uniform_is_catalan():
    rc, text = run(["zfun", "--n", "3", "--mu", "0"])
    assert rc == 0 and "Z=2" in text


def test_law_csv_and_json(tmp_path):
    rc, text = run(["law", "--n", "3", "--mu", "0"])
    lines = text.splitlines()
    assert rc == 0 and lines[0] == "index,log10_prob,prob"
    assert any(line.startswith("1,") and line.endswith(",0.5") for line in lines)
    path = tmp_path / "law.json"
    rc, _ = run(["law", "--n", "6", "--mu", "1", "--kind", "root-degree", "--format", "json",
                 "--out", str(path)])
    doc = json.loads(path.read_text())
    assert rc == 0 and doc["n"] == 6 and doc["kind"] == "root-degree"
    assert abs(sum(r["prob"] for r in doc["law"]) - 1) < 1e-12
    rc, text = run(["law", "--n", "3", "--mu", "0", "--format", "json"])
    law = json.loads(text)["law"]
    assert law[0] == {"index": 0, "log10_prob": None, "prob": 0.0}


def test_sample_roundtrip():
    rc, text = run(["sample", "--n", "9", "--mu", "1", "--count", "5", "--seed", "3"])
    lines = text.split()
    assert rc == 0 and len(lines) == 5
    for t in lines:
        rc, info = run(["count", "--verify-tree", t])
        assert rc == 0 and "size=9" in info
    assert run(["sample", "--n", "9", "--mu", "1", "--count", "5", "--seed", "3"])[1] == text


def test_asym_json():
    rc, text = run(["asym", "--n", "2000", "--mu", "1", "--json"])
    doc = json.loads(text)
    assert rc == 0 and doc["regime"] == "intermediate-gaussian"


def test_exit_codes(capsys):
    assert run(["exp", "star"])[0] == 0
    assert run(["exp", "nope"])[0] == 1
    assert run(["count", "--n", "x"])[0] == 1
    assert run([])[0] == 1
    assert run(["law", "--n", "5", "--mu", "-1"])[0] == 1
    err = capsys.readouterr().err
    assert "treelab: error[" in err


def test_gate_failure_exit_code(capsys):
    rc, _ = run(["exp", "star", "--config", "/nonexistent.json"])
    assert rc == 1
    assert run(["exp", "height-clt"])[0] == 2
    assert "gate-failed" in capsys.readouterr().err


def test_exp_list_and_config(tmp_path):
    rc, text = run(["exp", "--list"])
    assert rc == 0 and "star" in text.split()
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 80}))
    rc, text = run(["exp", "star", "--config", str(cfg)])
    assert rc == 0 and ",80," in text
    # a single n maps onto the ns list; mean/lln is 0.84 there, outside 10%
    rc, text = run(["exp", "height-lln", "--n", "300"])
    assert rc == 2 and text.count("\n") == 3


def test_cache_commands(tmp_path, monkeypatch):
    monkeypatch.setenv("TREELAB_CACHE", str(tmp_path / "env"))
    assert run(["count", "--n", "10", "--m", "10", "--build"])[0] == 0
    rc, text = run(["cache", "list"])
    assert rc == 0 and "counts-v" in text and str(tmp_path / "env") in text
    rc, text = run(["cache", "verify"])
    assert rc == 0 and text.strip().endswith("ok")
    rc, text = run(["cache", "list", "--cache-dir", str(tmp_path / "flag")])
    assert rc == 0 and "counts-v" not in text
    rc, text = run(["cache", "purge"])
    assert rc == 0 and "removed 1" in text
