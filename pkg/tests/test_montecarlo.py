import dataclasses
import math

import pytest
from numpy.testing import assert_allclose

from locgauss import critvals, montecarlo
from locgauss.errors import ParameterError
from locgauss.montecarlo import (
    Experiment,
    RejectionRow,
    RejectionTable,
    emit_table,
    format_table,
    load_experiments,
    read_table,
    run_experiment,
    table_experiments,
)

SMALL = dict(days=20, replications=12, cv_replications=2000)


def test_experiment_defaults():
    e = Experiment("null_sv_jd", 100, 50)
    assert (e.plan.k_n, e.plan.m_n) == (50, 37)
    assert Experiment("null_sv_jd", 200, 50).plan.m_n == 35
    assert e.trunc.alpha == 3.0 and e.trunc.varpi == 0.49 and e.days == 252
    with pytest.raises(ParameterError):
        Experiment("garch", 100, 50)
    with pytest.raises(ParameterError):
        Experiment("null_sv_jd", 100, 50, m_n_ratio=0.01)


def test_row_rate_and_se():
    r = RejectionRow("null_sv_jd", 100, 50, 37, 0.05, 43, 1000, 0)
    assert r.rate == 0.043
    assert_allclose(r.se, math.sqrt(0.043 * 0.957 / 1000))


def test_emit_empty_table(tmp_path):
    p = tmp_path / "t.csv"
    emit_table(RejectionTable(), p)
    assert p.read_text().strip() == ",".join(montecarlo.CSV_COLUMNS)


def test_emit_round_trip(tmp_path):
    p = tmp_path / "t.csv"
    t = RejectionTable([RejectionRow("null_sv_jd", 100, 50, 37, 0.05, 43, 1000, 7)])
    emit_table(t, p)
    lines = p.read_text().splitlines()
    assert lines[1].split(",")[5] == "0.0430"
    back = read_table(p).rows[0]
    assert back == dataclasses.replace(t.rows[0])


def test_run_is_reproducible(tmp_path):
    cache = critvals.CriticalValueCache(tmp_path)
    e = Experiment("pure_jump_ts", 100, 50, seed=3, **SMALL)
    a = run_experiment(e, cache)
    b = run_experiment(e, cache)
    assert a.rows == b.rows
    assert a.failed == 0
    assert all(0.0 <= r.rate <= 1.0 for r in a.rows)


def test_workers_do_not_change_results(tmp_path):
    e = Experiment("null_sv_jd", 100, 50, seed=5, **SMALL)
    s1, _ = montecarlo.replication_statistics(e, workers=1)
    s2, _ = montecarlo.replication_statistics(e, workers=2)
    assert s1.tobytes() == s2.tobytes()


def test_failed_replications_are_counted(tmp_path, monkeypatch):
    from locgauss.errors import DegenerateVolatilityError

    def boom(exp, index, q):
        if index % 3 == 0:
            raise DegenerateVolatilityError("zero volatility")
        return 0.0

    monkeypatch.setattr(montecarlo, "_one_replication", boom)
    t = run_experiment(Experiment("null_sv_jd", 100, 50, **SMALL), critvals.CriticalValueCache(tmp_path))
    assert t.failed == 4
    assert t.rows[0].reps == 8


def test_table_layouts():
    t1 = table_experiments(1, replications=5)
    assert [(e.n, e.k_n) for e in t1] == [(100, 33), (100, 50), (100, 100), (200, 50), (200, 67), (200, 200)]
    assert {e.model for e in table_experiments(3)} == {"pure_jump_ts_plus_noise"}
    with pytest.raises(ParameterError):
        table_experiments(4)


def test_format_table():
    rows = [RejectionRow("null_sv_jd", 100, k, 1, lvl, 5, 100, 0) for k in (33, 50) for lvl in (0.01, 0.05)]
    text = format_table(RejectionTable(rows))
    assert "k_n=33" in text and "k_n=50" in text and "5%" in text


def test_yaml_config(tmp_path):
    p = tmp_path / "exp.yaml"
    p.write_text(
        "experiments:\n"
        "  - model: pure_jump_ts\n"
        "    n: 100\n"
        "    k_n: [33, 50]\n"
        "    levels: [0.05]\n"
        "    reps: 10\n"
        "    seed: 4\n"
    )
    exps = load_experiments(p)
    assert [e.k_n for e in exps] == [33, 50]
    assert exps[0].levels == (0.05,) and exps[0].replications == 10 and exps[0].seed == 4
    p.write_text("model: null_sv_jd\nn: 100\nk_n: 50\ncolour: red\n")
    with pytest.raises(ParameterError):
        load_experiments(p)


@pytest.mark.slow
def test_power_and_size_orderings():
    # 200 replications keep this quick; the acceptance file runs the full 1000
    common = dict(replications=200, seed=11)
    null50 = run_experiment(Experiment("null_sv_jd", 100, 50, **common))
    null100 = run_experiment(Experiment("null_sv_jd", 100, 100, **common))
    jump50 = run_experiment(Experiment("pure_jump_ts", 100, 50, **common))
    assert null100.rate(0.05) > null50.rate(0.05)
    for lvl in (0.01, 0.05):
        assert jump50.rate(lvl) >= null50.rate(lvl)
    assert jump50.rate(0.05) - null50.rate(0.05) >= 0.5


@pytest.mark.slow
def test_noise_robustness_n200():
    common = dict(replications=200, seed=12)
    clean = run_experiment(Experiment("pure_jump_ts", 200, 50, **common))
    noisy = run_experiment(Experiment("pure_jump_ts_plus_noise", 200, 50, **common))
    assert abs(clean.rate(0.05) - noisy.rate(0.05)) <= 0.10
