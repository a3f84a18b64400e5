import io

import numpy as np
import pytest
from scipy.optimize import linprog
import scipy.sparse as sp

from speedscale.discretize import build_grid, all_configs
from speedscale.instances import generate
from speedscale.lp import OPTIMAL, build_config_lp, build_lp, check_solution, dump_lp, solve_lp
from speedscale.model import Instance


def _highs(lp):
    A = sp.vstack([lp.capacity, -lp.cover]).tocsr()
    b = np.concatenate([np.ones(len(lp.capacity_keys)), -np.ones(len(lp.job_ids))])
    return linprog(lp.cost, A_ub=A, b_ub=b, method="highs").fun


def test_single_job_lp_uses_whole_window():
    inst = Instance.single(2, [(0, 4, 0, 2)])
    sol = solve_lp(build_config_lp(inst, 1))
    assert sol.objective == pytest.approx(8.0)
    (var, x), = sol.support()
    assert (var.config.start, var.config.end) == (0, 2) and x == pytest.approx(1.0)


def test_two_job_example(two_jobs):
    sol = solve_lp(build_config_lp(two_jobs, 1))
    assert sol.objective == pytest.approx(2.0)
    assert check_solution(sol) == []


@pytest.mark.parametrize("seed", range(12))
def test_matches_highs(seed):
    kinds = ["random", "nested", "agreeable", "equal-work"]
    inst = generate(kinds[seed % 4], 3 + seed % 4, seed=seed)
    lp = build_config_lp(inst, 1, slot_cap=6)
    sol = solve_lp(lp)
    assert sol.status == OPTIMAL
    assert check_solution(sol) == []
    assert sol.objective == pytest.approx(_highs(lp), rel=1e-7)


@pytest.mark.parametrize("seed", range(6))
def test_multi_lp_matches_highs(seed):
    inst = generate("random", 4, 2 + seed % 2, seed=seed, alphas=None)
    lp = build_config_lp(inst, 1, slot_cap=5)
    sol = solve_lp(lp)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(_highs(lp), rel=1e-7)


def test_build_lp_from_explicit_configs(two_jobs):
    g = build_grid(two_jobs, 1, slot_cap=2)
    a = build_lp(two_jobs, {0: g}, {0: all_configs(two_jobs, g)})
    b = build_config_lp(two_jobs, 1, slot_cap=2)
    assert np.array_equal(a.cost, b.cost)
    assert np.array_equal(a.first, b.first) and np.array_equal(a.last, b.last)


def test_heterogeneous_costs_use_processor_alpha():
    from fractions import Fraction
    from speedscale.model import MULTI, Job, Processor, ProcessorSet
    procs = ProcessorSet((Processor(0, 2.0), Processor(1, 3.0)))
    job = Job(0, {0: Fraction(2), 1: Fraction(2)}, {0: Fraction(0), 1: Fraction(0)},
              {0: Fraction(1), 1: Fraction(2)})
    lp = build_config_lp(Instance(MULTI, (job,), procs), 1, slot_cap=1)
    # one slot per gap: [0,1] on processor 0 costs 2^2/1, [0,2] on processor 1 costs 2^3/2^2
    assert sorted(lp.cost.tolist()) == pytest.approx([2.0, 4.0])


def test_dump_lp_lists_every_row(two_jobs):
    lp = build_config_lp(two_jobs, 1, slot_cap=2)
    buf = io.StringIO()
    dump_lp(lp, buf)
    text = buf.getvalue()
    assert text.startswith("\\") and text.rstrip().endswith("End")
    assert text.count("cover_") == 2
    assert "Minimize" in text and "Subject To" in text
