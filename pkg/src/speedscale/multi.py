"""Heterogeneous multiprocessor pipeline.

One configuration LP over every (processor, job, configuration) triple
assigns each job to a processor; each processor's share is then turned into
a non-preemptive single-processor schedule independently.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .lp import OPTIMAL, LpSolution, LpVariable, build_config_lp, solve_lp
from .model import (
    NON_PREEMPTIVE, InfeasibleError, Instance, InternalError, JobId, Number, ParameterError,
    Schedule, as_fraction, total_energy,
)
from .single import (
    DEFAULT_TRIALS, RestrictedInstance, agreeable_restrict, edf_schedule, round_solution, solve_single,
    span_violations, speed_up,
)
from .yds import yds_schedule

log = logging.getLogger(__name__)

PIPELINE = "pipeline"
YDS_EDF = "yds-edf"
BACKENDS = (PIPELINE, YDS_EDF)


@dataclass(frozen=True)
class Assignment:
    choices: Dict[JobId, LpVariable]
    subsets: Dict[int, Tuple[JobId, ...]]
    """Jobs per processor, in instance order; every processor has an entry."""

    def processor_of(self, job: JobId) -> int:
        return self.choices[job].processor


@dataclass
class AssignResult:
    assignment: Assignment
    preemptive: Schedule
    preemptive_energy: float
    per_processor_energy: Dict[int, float]
    lp_objective: float
    solution: LpSolution
    trial_energies: List[float]
    best_trial: int


def _assign_once(instance: Instance, solution: LpSolution, seed: int):
    choice = round_solution(solution, seed)
    subsets = {p: tuple(j.id for j in instance.jobs if choice.choices[j.id].processor == p)
               for p in instance.processors.ids}
    _, pre = speed_up(choice, solution.lp.grids, instance)
    return Assignment(choice.choices, subsets), pre


def assign(instance: Instance, epsilon: Number = 1, seed: int = 0, trials: int = 1,
           slot_cap: Optional[int] = None, solution: Optional[LpSolution] = None) -> AssignResult:
    """Round the joint LP ``trials`` times (seeds ``seed + k``) and keep the
    cheapest preemptive non-migratory schedule."""
    if trials < 1:
        raise ParameterError("trials must be a positive integer")
    if solution is None:
        solution = solve_lp(build_config_lp(instance, as_fraction(epsilon), slot_cap))
    if solution.status != OPTIMAL:
        raise InfeasibleError(f"configuration LP is {solution.status}; try a larger epsilon or slot_cap")
    best = None
    energies = []
    for k in range(trials):
        asg, pre = _assign_once(instance, solution, seed + k)
        e = total_energy(pre, instance)
        energies.append(e)
        if best is None or e < best[0]:
            best = (e, k, asg, pre)
    e, k, asg, pre = best
    per_proc = {p: total_energy(pre.on_processor(p), instance) for p in instance.processors.ids}
    return AssignResult(asg, pre, e, per_proc, solution.objective, solution, energies, k)


@dataclass(frozen=True)
class ConversionRun:
    """One preemptive-to-non-preemptive conversion on a processor."""
    preemptive_energy: float
    energy: float
    restricted: RestrictedInstance


@dataclass
class Conversion:
    schedule: Schedule
    energy: float
    backend: str
    """Backend that produced the schedule (``yds-edf`` may fall back)."""
    runs: List[ConversionRun]


@dataclass
class ProcessorReport:
    processor: int
    jobs: Tuple[JobId, ...]
    schedule: Schedule
    energy: float
    preemptive_energy: float
    yds_energy: float
    backend: str
    runs: List[ConversionRun]

    @property
    def ratio_vs_yds(self) -> float:
        return self.energy / self.yds_energy if self.yds_energy > 0 else 1.0


def convert_processor(instance: Instance, processor: int, jobs: Tuple[JobId, ...],
                      backend: str = PIPELINE, epsilon: Number = 1, seed: int = 0,
                      trials: int = DEFAULT_TRIALS, slot_cap: Optional[int] = None) -> Conversion:
    """Non-preemptive schedule of ``jobs`` on ``processor`` alone.

    ``pipeline`` runs the whole single-processor algorithm on the subset.
    ``yds-edf`` tightens windows around the optimal preemptive schedule and
    runs EDF; if some execution span covers another job's window it falls
    back to ``pipeline``.
    """
    if backend not in BACKENDS:
        raise ParameterError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    if not jobs:
        return Conversion(Schedule((), NON_PREEMPTIVE), 0.0, backend, [])
    sub = instance.restrict(processor, jobs)
    if backend == YDS_EDF:
        opt = yds_schedule(sub)
        if not span_violations(sub, opt.schedule):
            try:
                restricted = agreeable_restrict(sub, opt.schedule)
            except InternalError as exc:
                log.info("processor %s: yds-edf restriction failed (%s); using pipeline", processor, exc)
            else:
                npr = edf_schedule(restricted)
                e = total_energy(npr, sub)
                return Conversion(npr, e, YDS_EDF, [ConversionRun(opt.energy, e, restricted)])
        log.debug("processor %s: yds spans contain windows; using pipeline", processor)
    res = solve_single(sub, epsilon, seed=seed, trials=trials, slot_cap=slot_cap)
    runs = [ConversionRun(t.preemptive_energy, t.energy, t.restricted) for t in res.trials]
    return Conversion(res.schedule, res.energy, PIPELINE, runs)


@dataclass
class MultiResult:
    schedule: Schedule
    energy: float
    lp_objective: float
    assignment: AssignResult
    processors: Dict[int, ProcessorReport]
    seed: int
    epsilon: Fraction
    slot_cap: Optional[int]
    trials: int
    backend: str
    warnings: List[str]

    @property
    def ratio(self) -> float:
        return self.energy / self.lp_objective

    @property
    def preemptive_energy(self) -> float:
        return self.assignment.preemptive_energy


def dominance_bound(instance: Instance, processor: int, jobs) -> float:
    """``(1 + w_max / w_min) ** alpha`` over the processor's jobs."""
    works = [instance.job(j).works[processor] for j in jobs]
    return float(1 + max(works) / min(works)) ** instance.processors.alpha(processor)


def solve_multi(instance: Instance, epsilon: Number = 1, seed: int = 0,
                trials: int = DEFAULT_TRIALS, backend: str = PIPELINE,
                slot_cap: Optional[int] = None, workers: int = 1) -> MultiResult:
    """Assign jobs with the joint LP, then schedule every processor on its own.

    Both stages use ``trials`` roundings seeded from ``seed``.  With one
    processor this reproduces :func:`solve_single` exactly.
    """
    if backend not in BACKENDS:
        raise ParameterError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    eps = as_fraction(epsilon)
    asg = assign(instance, eps, seed, trials, slot_cap)

    def work(p):
        jobs = asg.assignment.subsets[p]
        conv = convert_processor(instance, p, jobs, backend, eps, seed, trials, slot_cap)
        lower = yds_schedule(instance.restrict(p, jobs)).energy if jobs else 0.0
        return ProcessorReport(p, jobs, conv.schedule, conv.energy, asg.per_processor_energy[p],
                               lower, conv.backend, conv.runs)

    procs = instance.processors.ids
    if workers > 1 and len(procs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(work, procs))
    else:
        reports = [work(p) for p in procs]

    warnings = []
    for rep in reports:
        if rep.backend == YDS_EDF and rep.jobs:
            bound = dominance_bound(instance, rep.processor, rep.jobs)
            if rep.ratio_vs_yds > bound * (1 + 1e-9):
                msg = (f"processor {rep.processor}: energy/yds {rep.ratio_vs_yds:.6g} "
                       f"exceeds (1 + w_max/w_min)^alpha = {bound:.6g}")
                log.warning(msg)
                warnings.append(msg)
    segs = tuple(s for rep in reports for s in rep.schedule.segments)
    schedule = Schedule(segs, NON_PREEMPTIVE).sorted()
    energy = math.fsum(rep.energy for rep in reports)
    return MultiResult(schedule, energy, asg.lp_objective, asg, {r.processor: r for r in reports},
                       seed, eps, slot_cap, trials, backend, warnings)
