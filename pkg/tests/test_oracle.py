import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from speedscale.discretize import build_grid
from speedscale.instances import generate
from speedscale.lp import build_config_lp, solve_lp
from speedscale.model import Instance, ParameterError, UnsupportedModeError, verify
from speedscale.oracle import (
    bell_tilde, brute_force_single, random_feasible_preemptive,
)


@pytest.mark.parametrize("alpha, value", [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52)])
def test_bell_integer_points(alpha, value):
    bt = bell_tilde(alpha, 1e-8)
    assert bt.value == pytest.approx(value, abs=1e-6)
    assert bt.truncation_bound < 1e-8
    assert bt.terms_used > alpha


def test_bell_monotone_in_alpha():
    vals = [bell_tilde(1.1 + 0.1 * k).value for k in range(30)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_bell_rejects_bad_input():
    with pytest.raises(ParameterError):
        bell_tilde(0)
    with pytest.raises(ParameterError):
        bell_tilde(2, 0)


def test_brute_force_single_job():
    inst = Instance.single(2, [(0, 3, 0, 2)])
    res = brute_force_single(inst, epsilon=1)
    assert res.energy == pytest.approx(9 / 2)


def test_brute_force_two_jobs(two_jobs):
    g = build_grid(two_jobs, 1, slot_cap=1)
    assert brute_force_single(two_jobs, g).energy == pytest.approx(2.0)


def test_brute_force_limits():
    with pytest.raises(ParameterError):
        brute_force_single(generate("random", 7, seed=0), epsilon=1, slot_cap=1)
    with pytest.raises(ParameterError):
        brute_force_single(generate("random", 4, seed=0), epsilon=1)
    with pytest.raises(UnsupportedModeError):
        brute_force_single(generate("random", 3, 2, seed=0))


def _exhaustive(inst, grid):
    """Plain enumeration of every slot-disjoint choice."""
    from speedscale.discretize import config_ranges
    opts = []
    for j in inst.jobs:
        f, l = config_ranges(j, inst, grid)
        opts.append(list(zip(f.tolist(), l.tolist())))
    best = math.inf
    b = grid.boundaries
    for pick in itertools.product(*opts):
        used = set()
        ok = True
        for f, l in pick:
            if used & set(range(f, l + 1)):
                ok = False
                break
            used |= set(range(f, l + 1))
        if ok:
            cost = sum(float(j.work) ** inst.alpha / float(b[l + 1] - b[f]) ** (inst.alpha - 1)
                       for j, (f, l) in zip(inst.jobs, pick))
            best = min(best, cost)
    return best


@settings(max_examples=20)
@given(st.integers(2, 4), st.integers(0, 10_000))
def test_brute_force_matches_enumeration_and_lp(n, seed):
    inst = generate("random", n, seed=seed)
    grid = build_grid(inst, 1, slot_cap=2)
    res = brute_force_single(inst, grid)
    assert res.energy == pytest.approx(_exhaustive(inst, grid))
    assert verify(res.schedule, inst).ok
    lp = solve_lp(build_config_lp(inst, 1, 2))
    assert lp.objective <= res.energy * (1 + 1e-9)


@settings(max_examples=20)
@given(st.integers(2, 5), st.integers(0, 10_000), st.randoms(use_true_random=False))
def test_brute_force_permutation_invariant(n, seed, rnd):
    inst = generate("nested", n, seed=seed)
    jobs = list(inst.jobs)
    rnd.shuffle(jobs)
    perm = Instance("single", tuple(jobs), inst.processors)
    a = brute_force_single(inst, epsilon=1, slot_cap=2).energy
    b = brute_force_single(perm, epsilon=1, slot_cap=2).energy
    assert a == pytest.approx(b)


@settings(max_examples=30)
@given(st.integers(1, 6), st.integers(0, 10_000), st.integers(0, 1000))
def test_random_schedules_are_feasible(n, seed, k):
    inst = generate("random", n, seed=seed)
    assert verify(random_feasible_preemptive(inst, k), inst).ok
