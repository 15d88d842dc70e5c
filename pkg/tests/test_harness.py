from __future__ import annotations

import dataclasses
import time

import pytest

from dehnlab import harness
from dehnlab.digraph import LabeledGraph
from dehnlab.harness import (
    HEADER,
    DepthChainViolation,
    ExperimentConfig,
    _check_depth_chain,
    envelope,
    run_experiment,
    trial_seed,
    verify_witnesses,
)


@pytest.fixture
def z3_file(tmp_path):
    path = tmp_path / "z3.txt"
    path.write_text("gens a\nrel aaa\n")
    return str(path)


def test_envelope_values():
    assert envelope(1000) == 52  # ceil(7.389 * 6.908)
    assert envelope(0) == envelope(2)


def test_seed_scheme_is_stable():
    assert trial_seed(0, "WSP", 0, 0) == 2968811710
    assert trial_seed(0, "WSP", 0, 1) != trial_seed(0, "WSP", 0, 0)
    assert trial_seed(0, "ESP", 0, 0) != trial_seed(0, "WSP", 0, 0)


def test_zero_step_row():
    res = run_experiment(ExperimentConfig("WSP", (0,)))
    lines = res.to_csv().splitlines()
    assert lines[0] == ",".join(HEADER)
    assert lines[1] == "WSP,0,0,2968811710,0,0,0,1,,6,true"
    assert len(lines) == 2


def test_wsp_on_z3_schedule(z3_file):
    cfg = ExperimentConfig("WSP", (100, 1000), trials=200, presentation_path=z3_file,
                           keep_witnesses=True)
    res = run_experiment(cfg)
    assert len(res.rows) == 400
    assert all(r.iterations <= r.tree_height for r in res.rows)
    frac = res.success_fractions()
    assert frac[1000] >= frac[100] - 0.02
    assert verify_witnesses(res.witnesses).ok


@pytest.mark.parametrize("problem", ["WSP", "ESP", "CSP", "MSP1", "MSP2", "PKC"])
def test_every_problem_runs(problem):
    res = run_experiment(ExperimentConfig(problem, (30, 60), trials=4, seed=5,
                                          keep_witnesses=True))
    assert len(res.rows) == 8
    assert [(r.n, r.trial) for r in res.rows] == sorted((r.n, r.trial) for r in res.rows)
    assert verify_witnesses(res.witnesses).ok


def test_determinism_same_seed():
    cfg = ExperimentConfig("MSP2", (50, 80), trials=5, seed=11)
    assert run_experiment(cfg).to_csv() == run_experiment(cfg).to_csv()
    other = dataclasses.replace(cfg, seed=12)
    assert run_experiment(other).to_csv() != run_experiment(cfg).to_csv()


def test_worker_pool_does_not_change_bytes(monkeypatch):
    cfg = ExperimentConfig("CSP", (40, 20), trials=6, seed=3)
    monkeypatch.setenv("DEHNLAB_WORKERS", "1")
    serial = run_experiment(cfg).to_csv()
    monkeypatch.setattr(harness.os, "cpu_count", lambda: 4)
    monkeypatch.setenv("DEHNLAB_WORKERS", "2")
    assert harness.worker_count(12) == 2
    assert run_experiment(cfg).to_csv() == serial


def test_timing_column_is_opt_in():
    plain = run_experiment(ExperimentConfig("WSP", (20,)))
    timed = run_experiment(ExperimentConfig("WSP", (20,), timing=True))
    assert plain.rows[0].time_ms is None and plain.rows[0].cells()[8] == ""
    assert timed.rows[0].time_ms is not None and float(timed.rows[0].cells()[8]) >= 0


def _corrupt(rec):
    g = rec.outcome.witness
    x = abs(rec.word[0]) - 1
    v = g.base_out
    keep = tuple(e for e in g.edges if not (e[2] == x and v in (e[0], e[1])))
    assert len(keep) < len(g.edges)
    bad = LabeledGraph(g.num_vertices, keep, g.base_out, g.base_in)
    return dataclasses.replace(rec, outcome=dataclasses.replace(rec.outcome, witness=bad))


def test_corrupted_witness_is_flagged():
    res = run_experiment(ExperimentConfig("WSP", (40,), trials=5, keep_witnesses=True))
    recs = [r for r in res.witnesses if r.word]
    assert verify_witnesses(recs).ok
    recs[0] = _corrupt(recs[0])
    report = verify_witnesses(recs)
    assert not report.ok and report.failures == (("WSP", 40, recs[0].trial),)


def test_verify_thousand_rows_quickly():
    res = run_experiment(ExperimentConfig("WSP", (60,), trials=1000, keep_witnesses=True))
    assert len(res.witnesses) == 1000
    t = time.perf_counter()
    report = verify_witnesses(res.witnesses)
    assert report.ok and report.checked == 1000
    assert time.perf_counter() - t < 10.0


def test_cmj_pass_through():
    res = run_experiment(ExperimentConfig("CMJ", (100, 200), trials=3, seed=2))
    lines = res.to_csv().splitlines()
    assert lines[0] == "EM,n,trial,height,ratio"
    assert len(lines) == 1 + 2 * 4
    assert lines[4].startswith("1,100,mean,")
    from dehnlab.branching import OffspringDistribution, estimate_height_ratio
    s = estimate_height_ratio(OffspringDistribution.point(1), 100, 3, trial_seed(2, "CMJ", 100, 0))
    assert [int(line.split(",")[3]) for line in lines[1:4]] == list(s.heights)


@pytest.mark.parametrize("kwargs", [
    dict(problem="XYZ", ns=(1,)),
    dict(problem="WSP", ns=()),
    dict(problem="WSP", ns=(-1,)),
    dict(problem="WSP", ns=(1,), trials=0),
    dict(problem="MSP2", ns=(1,), q=1.0),
    dict(problem="CMJ", ns=(1,)),
    dict(problem="WSP", ns=(1,), max_iter=-1),
])
def test_config_errors(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_context_errors(tmp_path):
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig("WSP", (1,), presentation_path=str(tmp_path / "nope")))
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig("CSP", (1,), word="aA"))
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig("MSP1", (1,), subgroup=("1",)))
    path = tmp_path / "p.txt"
    path.write_text("gens a b\nrel abAB\n")
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig("PKC", (1,), presentation_path=str(path)))


def test_depth_chain_check():
    _check_depth_chain("WSP", 1, 0, True, 2, 10, 2)
    _check_depth_chain("WSP", 1, 0, False, 3, 3, 5)
    with pytest.raises(DepthChainViolation):
        _check_depth_chain("WSP", 1, 0, True, 3, 10, 2)
    with pytest.raises(DepthChainViolation):
        _check_depth_chain("WSP", 1, 0, False, 5, 5, 5)
