"""Single-processor pipeline: LP, randomized rounding, speed-up, restriction, EDF.

The rounded choice gives every job one configuration; overlapping
configurations are resolved slot by slot by running the slot's total work at
a common speed.  That preemptive schedule is turned into an agreeable
instance by tightening each job's window around its execution span, and
earliest-deadline-first then runs every job in one piece.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .discretize import Configuration, SlotGrid
from .lp import OPTIMAL, LpSolution, LpVariable, build_config_lp, solve_lp
from .model import (
    NON_PREEMPTIVE, PREEMPTIVE, SINGLE, InfeasibleError, Instance, InternalError, Job,
    JobId, Number, ParameterError, Processor, ProcessorSet, Schedule, Segment,
    UnsupportedModeError, as_fraction, merge_segments, nested_pairs, total_energy,
)

log = logging.getLogger(__name__)

DEFAULT_TRIALS = 32


@dataclass(frozen=True)
class RoundedChoice:
    choices: Dict[JobId, LpVariable]
    seed: Optional[int]

    def config(self, job: JobId) -> Configuration:
        return self.choices[job].config


@dataclass(frozen=True)
class PreemptiveProfile:
    """Per (processor, slot): work of each job in the slot and the slot speed."""
    work: Dict[Tuple[int, int], Dict[JobId, Fraction]]
    speed: Dict[Tuple[int, int], Fraction]


@dataclass(frozen=True)
class RestrictedJob:
    id: JobId
    work: Fraction
    processing_time: Fraction
    first_start: Fraction
    last_end: Fraction
    release: Fraction
    deadline: Fraction
    pieces: Tuple[Tuple[Fraction, Fraction], ...]
    """(duration, speed) of each execution piece, in time order."""


@dataclass(frozen=True)
class RestrictedInstance:
    jobs: Tuple[RestrictedJob, ...]
    processor: int
    alpha: float

    def as_instance(self) -> Instance:
        return Instance(SINGLE,
                        tuple(Job.simple(j.id, j.work, j.release, j.deadline, self.processor)
                              for j in self.jobs),
                        ProcessorSet((Processor(self.processor, self.alpha),)))

    def windows(self) -> List[Tuple[Fraction, Fraction]]:
        return [(j.release, j.deadline) for j in self.jobs]


def round_solution(solution: LpSolution, seed: Optional[int] = None,
                   rng: Optional[np.random.Generator] = None) -> RoundedChoice:
    """Pick one variable per job with probability proportional to its LP weight."""
    if solution.status != OPTIMAL:
        raise ParameterError("cannot round a non-optimal LP solution")
    if rng is None:
        rng = np.random.default_rng(seed)
    lp = solution.lp
    choices = {}
    for jid in lp.job_ids:
        idx = lp.variables_of(jid)
        w = np.clip(solution.x[idx], 0.0, None)
        w[w <= 1e-12] = 0.0
        total = w.sum()
        if not total > 0:
            raise InternalError(f"job {jid!r} has no positive LP weight")
        cum = np.cumsum(w / total)
        pick = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        pick = min(pick, len(idx) - 1)
        while w[pick] == 0.0:  # searchsorted can land on a zero-weight tail
            pick -= 1
        choices[jid] = lp.variable(int(idx[pick]))
    return RoundedChoice(choices, seed)


def speed_up(choice: RoundedChoice, grids: Mapping[int, SlotGrid],
             instance: Instance) -> Tuple[PreemptiveProfile, Schedule]:
    """Spread each job uniformly over its configuration and run every slot at
    its total work divided by its length.

    Jobs sharing a slot run back to back in instance order.
    """
    work: Dict[Tuple[int, int], Dict[JobId, Fraction]] = {}
    # constant rate w/|c| per job, so a slot's speed is the sum of its jobs' rates
    rate: Dict[Tuple[int, int], Dict[JobId, Fraction]] = {}
    cuts: Dict[int, set] = {}
    for job in instance.jobs:
        var = choice.choices[job.id]
        grid = grids[var.processor]
        c = var.config
        r = job.works[var.processor] / c.length
        cuts.setdefault(var.processor, set()).update((c.first_slot, c.last_slot + 1))
        for t in c.slots:
            key = (var.processor, t)
            rate.setdefault(key, {})[job.id] = r
            work.setdefault(key, {})[job.id] = r * grid.slot_length(t)

    speed, segs = {}, []
    for key in sorted(rate):
        speed[key] = sum(rate[key].values(), Fraction(0))
    for p, marks in cuts.items():
        grid = grids[p]
        marks = sorted(marks)
        for lo, hi in zip(marks, marks[1:]):
            active = rate.get((p, lo))
            if not active:
                continue
            s = speed[(p, lo)]
            if len(active) == 1:
                # one job on the whole stretch: a single segment
                (jid,) = active
                segs.append(Segment(jid, p, grid.boundaries[lo], grid.boundaries[hi], s))
                continue
            for t in range(lo, hi):
                length = grid.slot_length(t)
                clock = grid.boundaries[t]
                for jid, r in active.items():
                    dur = length * r / s
                    segs.append(Segment(jid, p, clock, clock + dur, s))
                    clock += dur
                if clock != grid.boundaries[t + 1]:
                    raise InternalError(f"slot {t} of processor {p} is not exactly filled")
    return PreemptiveProfile(work, speed), Schedule(tuple(merge_segments(segs)), PREEMPTIVE)


def span_violations(instance: Instance, schedule: Schedule) -> List[Tuple[JobId, JobId]]:
    """Pairs (j, k) where job j's execution span contains job k's whole life interval."""
    out = []
    runs = schedule.by_job()
    for job in instance.jobs:
        segs = runs.get(job.id)
        if not segs:
            continue
        b, e = segs[0].start, segs[-1].end
        for other in instance.jobs:
            if other.id != job.id and b <= other.release and other.deadline <= e:
                out.append((job.id, other.id))
    return out


def agreeable_restrict(instance: Instance, schedule: Schedule) -> RestrictedInstance:
    """Tighten every window around its execution span so no two windows nest.

    The new release is the latest release, not after the span, of a job
    whose deadline falls before the span ends (or the original release); the
    new deadline is the earliest deadline of a job released after the new
    release (or the original deadline).  Windows may share endpoints with
    the life intervals they now touch.
    """
    if instance.mode != SINGLE:
        raise UnsupportedModeError("agreeable_restrict needs a single-mode instance")
    proc = instance.processors.ids[0]
    runs = schedule.by_job()
    bad = span_violations(instance, schedule)
    if bad:
        raise InternalError(f"execution span of job {bad[0][0]!r} contains the life "
                            f"interval of job {bad[0][1]!r}")
    out = []
    for job in instance.jobs:
        segs = runs.get(job.id)
        if not segs:
            raise InternalError(f"job {job.id!r} is not executed")
        b, e = segs[0].start, segs[-1].end
        p = sum((s.duration for s in segs), Fraction(0))
        others = [k for k in instance.jobs if k.id != job.id]
        r_new = max([job.release] + [k.release for k in others if k.deadline < e])
        d_new = min([job.deadline] + [k.deadline for k in others if k.release > r_new])
        if not (job.release <= r_new <= b and e <= d_new <= job.deadline):
            raise InternalError(f"job {job.id!r}: restricted window [{r_new}, {d_new}] does not "
                                f"sit between [{b}, {e}] and [{job.release}, {job.deadline}]")
        pieces = tuple((s.duration, s.speed) for s in segs)
        out.append(RestrictedJob(job.id, job.work, p, b, e, r_new, d_new, pieces))
    restricted = RestrictedInstance(tuple(out), proc, instance.alpha)
    nests = nested_pairs(restricted.windows())
    if nests:
        a, b = nests[0]
        ja, jb = out[a], out[b]
        raise InternalError(f"restricted instance is not agreeable: [{jb.release}, {jb.deadline}] "
                            f"of job {jb.id!r} nests in [{ja.release}, {ja.deadline}] of job {ja.id!r}")
    return restricted


def _merge_pieces(pieces):
    out = []
    for dur, s in pieces:
        if out and out[-1][1] == s:
            out[-1] = (out[-1][0] + dur, s)
        else:
            out.append((dur, s))
    return out


def edf_schedule(restricted: RestrictedInstance, flatten: bool = False) -> Schedule:
    """Run jobs in earliest-deadline order, each at the earliest possible start.

    A job keeps the speed pieces it had in the preemptive schedule, played
    back to back, so the energy is unchanged.  With ``flatten`` each job runs
    at the constant speed ``work / processing_time`` instead, which never
    costs more.
    """
    order = sorted(range(len(restricted.jobs)),
                   key=lambda k: (restricted.jobs[k].deadline, restricted.jobs[k].release, k))
    clock = None
    segs = []
    proc = restricted.processor
    for k in order:
        j = restricted.jobs[k]
        start = j.release if clock is None else max(clock, j.release)
        end = start + j.processing_time
        if end > j.deadline:
            raise InternalError(f"EDF misses deadline of job {j.id!r}: ends {end} > {j.deadline}; "
                                f"windows {restricted.windows()}")
        pieces = [(j.processing_time, j.work / j.processing_time)] if flatten else _merge_pieces(j.pieces)
        t = start
        for dur, s in pieces:
            segs.append(Segment(j.id, proc, t, t + dur, s))
            t += dur
        clock = end
    return Schedule(tuple(segs), NON_PREEMPTIVE)


@dataclass
class TrialRecord:
    seed: int
    preemptive_energy: float
    energy: float
    choice: RoundedChoice
    preemptive: Schedule
    restricted: RestrictedInstance
    schedule: Schedule


@dataclass
class SingleResult:
    schedule: Schedule
    energy: float
    lp_objective: float
    solution: LpSolution
    trials: List[TrialRecord]
    best_trial: int
    seed: int
    epsilon: Fraction
    slot_cap: Optional[int]
    slots_per_gap: int

    @property
    def best(self) -> TrialRecord:
        return self.trials[self.best_trial]

    @property
    def ratio(self) -> float:
        return self.energy / self.lp_objective

    @property
    def trial_energies(self) -> List[float]:
        return [t.energy for t in self.trials]


def run_trial(instance: Instance, solution: LpSolution, seed: int,
              flatten: bool = False, cache: Optional[dict] = None) -> TrialRecord:
    """One rounding followed by speed-up, restriction and EDF.

    ``cache`` maps a rounded choice to its result, so repeated draws of the
    same configurations are evaluated once.
    """
    choice = round_solution(solution, seed)
    key = tuple(choice.choices[j.id] for j in instance.jobs)
    if cache is not None and key in cache:
        pre_e, e, pre, restricted, npr = cache[key]
        return TrialRecord(seed, pre_e, e, choice, pre, restricted, npr)
    _, pre = speed_up(choice, solution.lp.grids, instance)
    restricted = agreeable_restrict(instance, pre)
    npr = edf_schedule(restricted, flatten=flatten)
    out = (total_energy(pre, instance), total_energy(npr, instance), pre, restricted, npr)
    if cache is not None:
        cache[key] = out
    return TrialRecord(seed, out[0], out[1], choice, pre, restricted, npr)


def solve_single(instance: Instance, epsilon: Number = 1, seed: int = 0,
                 trials: int = DEFAULT_TRIALS, slot_cap: Optional[int] = None,
                 flatten: bool = False) -> SingleResult:
    """Best of ``trials`` independent roundings of one LP solution.

    Trial ``k`` uses seed ``seed + k``.
    """
    if instance.mode != SINGLE:
        raise UnsupportedModeError("solve_single needs a single-mode instance")
    if trials < 1:
        raise ParameterError("trials must be a positive integer")
    eps = as_fraction(epsilon)
    lp = build_config_lp(instance, eps, slot_cap)
    sol = solve_lp(lp)
    if sol.status != OPTIMAL:
        raise InfeasibleError(f"configuration LP is {sol.status}; try a larger epsilon or slot_cap")
    cache: dict = {}
    records = [run_trial(instance, sol, seed + k, flatten, cache) for k in range(trials)]
    best = min(range(trials), key=lambda k: records[k].energy)
    grid = next(iter(lp.grids.values()))
    log.debug("solve_single: n=%d lp=%.6g best=%.6g", instance.n, sol.objective, records[best].energy)
    return SingleResult(records[best].schedule, records[best].energy, sol.objective, sol, records,
                        best, seed, eps, slot_cap, grid.slots_per_gap)
