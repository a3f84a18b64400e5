import pytest

from speedscale.experiments import (
    bell_rows, bound_report, equal_work_bound, multi_bound, ratio_sweep, single_bounds,
    table1, table1_formulas, to_csv,
)
from speedscale.instances import generate


def test_table_formulas_at_reference_point():
    f = table1_formulas(2.0, 1.0, 2.0)
    assert f["heterogeneous_ours"] == pytest.approx(72.0, abs=1e-6)
    assert f["single_ours"] == pytest.approx(8.0, abs=1e-6)
    assert f["single_previous_lp"] == pytest.approx(16.0, abs=1e-6)
    assert f["single_previous_combinatorial"] == pytest.approx(24.0)
    assert f["homogeneous_previous"] == pytest.approx(2.5 * 72.0, abs=1e-6)
    assert f["homogeneous_works_previous"] == pytest.approx(2.5 * 2 * (2 * 3 * 2) ** 2, abs=1e-5)


def test_bounds():
    assert equal_work_bound(2.0, 1.0) == pytest.approx(32.0)
    assert multi_bound(2.0, 1.0, 1.0) == pytest.approx(32.0)
    b = single_bounds(2.0, 1.0)
    assert b == pytest.approx({"single_eps_pow_alpha": 8.0, "single_eps_pow_1": 4.0,
                               "single_eps_pow_alpha_minus_1": 4.0})
    assert bound_report(generate("equal-work", 3, 2, seed=0), 1.0)["equal_work"] == pytest.approx(32.0)
    assert "equal_work" not in bound_report(generate("random", 6, 2, seed=1, max_work=9), 1.0)


def test_bell_rows_default_grid_includes_integers():
    rows = {r["alpha"]: r["value"] for r in bell_rows()}
    for a, v in [(1.0, 1), (2.0, 2), (3.0, 5), (4.0, 15)]:
        assert rows[a] == pytest.approx(v, abs=1e-6)


def test_ratio_sweep_rows():
    rows = ratio_sweep(alphas=(1.5, 3.0), epsilons=(1.0,), count=2, n=3, trials=2, slot_cap=3)
    assert len(rows) == 4
    assert all(r["ratio"] <= r["bound"] for r in rows)


def test_table1_parallel_matches_serial():
    kw = dict(alphas=(2.0,), epsilons=(1.0,), wratios=(1,), count=2, n=3, trials=2, slot_cap=3)
    assert to_csv(table1(**kw)) == to_csv(table1(jobs=2, **kw))
