import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from speedscale.instances import generate
from speedscale.model import (
    MULTI, NON_PREEMPTIVE, Instance, Job, ParameterError, Processor, ProcessorSet, total_energy,
    verify,
)
from speedscale.multi import (
    PIPELINE, YDS_EDF, assign, convert_processor, dominance_bound, solve_multi,
)
from speedscale.single import solve_single
from speedscale.yds import yds_schedule

F = Fraction


def _job(jid, per_proc):
    """per_proc: {processor: (work, release, deadline)}"""
    return Job(jid, {p: F(w) for p, (w, _, _) in per_proc.items()},
               {p: F(r) for p, (_, r, _) in per_proc.items()},
               {p: F(d) for p, (_, _, d) in per_proc.items()})


def _procs(*alphas):
    return ProcessorSet(tuple(Processor(i, a) for i, a in enumerate(alphas)))


def test_only_eligible_processor_is_used():
    inst = Instance(MULTI, (_job(0, {1: (2, 0, 2)}), _job(1, {0: (1, 0, 1), 1: (1, 0, 1)})),
                    _procs(2.0, 2.0))
    for seed in range(10):
        asg = assign(inst, 1, seed, trials=1)
        assert asg.assignment.processor_of(0) == 1


def test_two_identical_jobs_split_across_processors():
    jobs = (_job(0, {0: (1, 0, 1), 1: (1, 0, 1)}), _job(1, {0: (1, 0, 1), 1: (1, 0, 1)}))
    inst = Instance(MULTI, jobs, _procs(2.0, 2.0))
    res = solve_multi(inst, 1, seed=0, trials=4)
    # alone on a processor each job runs at speed 1 for energy 1
    assert res.energy == pytest.approx(2.0)
    assert sorted(len(r.jobs) for r in res.processors.values()) == [1, 1]


def test_partitioned_agreeable_equals_yds_sum():
    jobs = (_job(0, {0: (1, 0, 2)}), _job(1, {0: (2, 1, 4)}),
            _job(2, {1: (3, 0, 3)}), _job(3, {1: (1, 2, 5)}))
    inst = Instance(MULTI, jobs, _procs(2.0, 3.0))
    res = solve_multi(inst, 1, seed=0, trials=4, backend=YDS_EDF)
    want = sum(yds_schedule(inst.restrict(p)).energy for p in (0, 1))
    assert res.energy == pytest.approx(want, rel=1e-12)
    assert all(r.backend == YDS_EDF for r in res.processors.values())


def test_convert_examples():
    inst = generate("random", 5, 2, seed=4)
    conv = convert_processor(inst, 0, (), PIPELINE)
    assert conv.schedule.segments == () and conv.energy == 0.0
    one = inst.jobs_on(0)[0].id
    conv = convert_processor(inst, 0, (one,), YDS_EDF)
    (seg,) = conv.schedule.segments
    assert (seg.start, seg.end) == inst.job(one).window(0)
    with pytest.raises(ParameterError):
        convert_processor(inst, 0, (one,), "magic")


def test_yds_edf_is_exact_on_agreeable_subset():
    inst = generate("agreeable", 6, 1, seed=8, mode=MULTI)
    ids = tuple(j.id for j in inst.jobs)
    conv = convert_processor(inst, 0, ids, YDS_EDF)
    assert conv.backend == YDS_EDF
    assert conv.energy == pytest.approx(yds_schedule(inst.restrict(0)).energy, rel=1e-12)


def test_yds_edf_falls_back_when_spans_cover_windows():
    inst = Instance(MULTI, (_job(0, {0: (4, 0, 10)}), _job(1, {0: (1, 4, 5)})), _procs(2.0))
    conv = convert_processor(inst, 0, (0, 1), YDS_EDF, slot_cap=4)
    assert conv.backend == PIPELINE
    assert verify(conv.schedule, inst.restrict(0), NON_PREEMPTIVE).ok


def test_single_processor_reduction_is_exact():
    for seed in range(4):
        single = generate("nested", 5, seed=seed)
        multi = Instance(MULTI, single.jobs, single.processors)
        a = solve_single(single, 1, seed=seed, trials=6, slot_cap=5)
        b = solve_multi(multi, 1, seed=seed, trials=6, slot_cap=5)
        assert a.energy == b.energy
        assert a.schedule.segments == b.schedule.segments


def test_equal_work_ratio_under_bound():
    for seed in range(5):
        inst = generate("equal-work", 5, 2, seed=seed)
        res = solve_multi(inst, 1, seed=seed, trials=4, slot_cap=6)
        assert res.ratio <= 32


def test_dominance_bound():
    inst = Instance(MULTI, (_job(0, {0: (1, 0, 2)}), _job(1, {0: (3, 0, 2)})), _procs(2.0))
    assert dominance_bound(inst, 0, (0, 1)) == 16.0


def test_workers_do_not_change_result():
    inst = generate("random", 6, 3, seed=2)
    a = solve_multi(inst, 1, seed=1, trials=4, slot_cap=5)
    b = solve_multi(inst, 1, seed=1, trials=4, slot_cap=5, workers=3)
    assert a.schedule == b.schedule and a.energy == b.energy


@settings(max_examples=20)
@given(st.sampled_from(["random", "equal-work", "nested", "agreeable"]), st.integers(2, 6),
       st.integers(2, 3), st.integers(0, 10_000), st.sampled_from([PIPELINE, YDS_EDF]))
def test_multi_invariants(kind, n, m, seed, backend):
    inst = generate(kind, n, m, seed=seed, alphas=[2.0, 2.5, 3.0][:m])
    res = solve_multi(inst, 1, seed=seed, trials=3, slot_cap=4, backend=backend)
    subsets = res.assignment.assignment.subsets
    seen = [j for p in subsets for j in subsets[p]]
    assert sorted(seen) == sorted(j.id for j in inst.jobs)
    for p, jobs in subsets.items():
        assert all(p in inst.job(j).works for j in jobs)
    pre = res.assignment.preemptive
    assert math.fsum(res.assignment.per_processor_energy.values()) == pytest.approx(
        total_energy(pre, inst), rel=1e-12)
    assert verify(pre, inst).ok
    assert verify(res.schedule, inst, NON_PREEMPTIVE).ok
    assert res.energy == pytest.approx(total_energy(res.schedule, inst), rel=1e-12)
    for rep in res.processors.values():
        assert rep.energy >= rep.yds_energy * (1 - 1e-9)
