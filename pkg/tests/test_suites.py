import json

import numpy as np
import pytest

from john_gauge import geom, suites


def test_theorem3_counts():
    rep = suites.theorem3_suite(3, 100, seed=1)
    s = rep.summary()
    assert s["cases"] == 101 and s["pass"] == 101 and s["fail"] == 0
    kinds = [c["kind"] for c in rep.cases]
    assert kinds.count("regular") == 1


def test_theorem3_regular_only():
    rep = suites.theorem3_suite(3, 1, seed=0, regular_only=True)
    assert len(rep.cases) == 1 and rep.cases[0]["is_ball"] is True


def test_theorem3_numeric_engine():
    rep = suites.theorem3_suite(2, 10, seed=3, engine="numeric")
    assert rep.ok


def test_theorem3_deterministic(monkeypatch):
    monkeypatch.setenv("JOHN_GAUGE_THREADS", "1")
    a = suites.theorem3_suite(2, 20, seed=4).lines()
    monkeypatch.setenv("JOHN_GAUGE_THREADS", "4")
    b = suites.theorem3_suite(2, 20, seed=4).lines()
    assert a == b


def test_report_lines_shape():
    rep = suites.theorem3_suite(2, 5, seed=0)
    lines = [json.loads(x) for x in rep.lines()]
    assert [d["case"] for d in lines[:-1]] == list(range(6))
    assert "summary" in lines[-1]
    s = lines[-1]["summary"]
    assert s["pass"] + s["fail"] == s["cases"]
    assert all("wall_time" not in d for d in lines[:-1])
    timed = suites.theorem3_suite(2, 2, seed=0, timing=True)
    assert all("wall_time" in c for c in timed.cases)


def test_corpus_exclusion_band():
    lo, hi = suites.EXCLUSION_BAND
    for seed in range(50):
        spread = geom.edge_spread(suites.classifier_corpus_simplex(3, seed))
        assert not lo < spread < hi


def test_disagreement_reported_not_thrown():
    # a ball tolerance far too loose makes non-regular simplices look like balls
    rep = suites.theorem3_suite(2, 10, seed=0, tol_ball=10.0)
    assert not rep.ok and rep.failed > 0


def test_bl_suite_small():
    rep = suites.bl_suite(2, samples=10**5, seed=0, trials=2)
    assert len(rep.cases) == 3 and rep.ok
    reg = rep.cases[0]
    assert reg["kind"] == "regular" and reg["is_orthonormal"]
    for c in rep.cases:
        assert c["isotropy_residual"] <= 1e-10
        assert c["estimate"] <= 1 + 3 * c["std_error"]
    for c in rep.cases[1:]:
        assert c["source_regular"] is False and c["inscribed_orthonormal"] is False


def test_bl_suite_deterministic():
    a = suites.bl_suite(2, samples=2 * 10**4, seed=9, trials=1).lines()
    b = suites.bl_suite(2, samples=2 * 10**4, seed=9, trials=1).lines()
    assert a == b
