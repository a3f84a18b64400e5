"""Reference values for tests: the generalized Bell number, an exact
slot-respecting optimum for tiny instances, and a random feasible schedule
generator used as an adversary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from .discretize import SlotGrid, build_grid, config_ranges
from .model import (
    NON_PREEMPTIVE, PREEMPTIVE, SINGLE, InfeasibleError, Instance, JobId, Number,
    ParameterError, Schedule, Segment, UnsupportedModeError, merge_segments, total_energy,
)

MAX_JOBS = 6
MAX_SLOTS = 60


@dataclass(frozen=True)
class BellTilde:
    alpha: float
    value: float
    terms_used: int
    truncation_bound: float


def bell_tilde(alpha: float, tol: float = 1e-8) -> BellTilde:
    """``sum_k k**alpha * exp(-1) / k!``, the alpha-th moment of Poisson(1).

    Summation stops at the first term below ``tol / 100`` past ``k = alpha``.
    The reported bound majorizes the tail by a geometric series.
    """
    alpha = float(alpha)
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    terms = []
    k = 1
    while True:
        term = math.exp(alpha * math.log(k) - 1.0 - math.lgamma(k + 1))
        terms.append(term)
        if term < tol * 1e-2 and k > alpha:
            break
        k += 1
    # the next-term ratio ((k+1)/k)^alpha / (k+1) only shrinks from here on
    q = ((k + 1) / k) ** alpha / (k + 1)
    bound = terms[-1] * q / (1 - q) if q < 1 else math.inf
    return BellTilde(alpha, math.fsum(terms), k + 1, bound)


@dataclass(frozen=True)
class OracleResult:
    energy: float
    schedule: Schedule
    choices: Dict[JobId, Tuple[int, int]]
    """Chosen ``(first, last)`` slot run per job."""
    nodes: int


def brute_force_single(instance: Instance, grid: Optional[SlotGrid] = None,
                       epsilon: Number = 1, slot_cap: Optional[int] = None) -> OracleResult:
    """Cheapest assignment of one configuration per job with no two sharing a slot.

    Exhaustive depth-first search with branch and bound.  The bound adds,
    for every unplaced job, its cheapest configuration that still fits.
    """
    if instance.mode != SINGLE:
        raise UnsupportedModeError("brute_force_single needs a single-mode instance")
    if instance.n > MAX_JOBS:
        raise ParameterError(f"brute force is limited to {MAX_JOBS} jobs, got {instance.n}")
    if grid is None:
        grid = build_grid(instance, epsilon, slot_cap)
    if grid.n_slots > MAX_SLOTS:
        raise ParameterError(f"brute force is limited to {MAX_SLOTS} slots, got {grid.n_slots}")
    alpha = instance.alpha
    bounds = grid.boundaries

    options = []
    for job in instance.jobs:
        firsts, lasts = config_ranges(job, instance, grid)
        opts = []
        for f, l in zip(firsts.tolist(), lasts.tolist()):
            length = float(bounds[l + 1] - bounds[f])
            mask = ((1 << (l + 1)) - 1) ^ ((1 << f) - 1)
            opts.append((float(job.work) ** alpha / length ** (alpha - 1), mask, f, l))
        opts.sort()
        options.append(opts)
    order = sorted(range(instance.n), key=lambda k: len(options[k]))

    best_cost = math.inf
    best_pick: List[Tuple[int, int]] = []
    nodes = 0

    def cheapest(k, used):
        for cost, mask, _, _ in options[k]:
            if not mask & used:
                return cost
        return math.inf

    def dfs(depth, used, cost, pick):
        nonlocal best_cost, best_pick, nodes
        nodes += 1
        if depth == len(order):
            if cost < best_cost:
                best_cost, best_pick = cost, list(pick)
            return
        bound = cost + sum(cheapest(k, used) for k in order[depth:])
        if bound >= best_cost:
            return
        k = order[depth]
        for c, mask, f, l in options[k]:
            if mask & used or cost + c >= best_cost:
                continue
            pick.append((k, f, l))
            dfs(depth + 1, used | mask, cost + c, pick)
            pick.pop()

    dfs(0, 0, 0.0, [])
    if not best_pick:
        raise InfeasibleError("no slot-disjoint choice of configurations exists on this grid")
    proc = grid.processor
    segs, choices = [], {}
    for k, f, l in best_pick:
        job = instance.jobs[k]
        start, end = bounds[f], bounds[l + 1]
        segs.append(Segment(job.id, proc, start, end, job.work / (end - start)))
        choices[job.id] = (f, l)
    schedule = Schedule(tuple(segs), NON_PREEMPTIVE).sorted()
    return OracleResult(total_energy(schedule, instance), schedule, choices, nodes)


def random_feasible_preemptive(instance: Instance, seed: int) -> Schedule:
    """A random feasible preemptive schedule.

    Each job's work is split at random over the landmark gaps of its
    window; every gap then runs its total work at one constant speed with
    the jobs in random order.
    """
    if instance.mode != SINGLE:
        raise UnsupportedModeError("random_feasible_preemptive needs a single-mode instance")
    rng = np.random.default_rng(seed)
    proc = instance.processors.ids[0]
    marks = sorted({t for j in instance.jobs for t in (j.release, j.deadline)})
    gaps = list(zip(marks, marks[1:]))
    load: List[Dict[JobId, Fraction]] = [dict() for _ in gaps]
    for job in instance.jobs:
        inside = [g for g, (a, b) in enumerate(gaps) if job.release <= a and b <= job.deadline]
        # integer weights keep the split exact
        weights = rng.integers(0, 8, len(inside))
        if weights.sum() == 0:
            weights[rng.integers(len(inside))] = 1
        total = int(weights.sum())
        for g, wt in zip(inside, weights.tolist()):
            if wt:
                load[g][job.id] = job.work * Fraction(wt, total)
    segs = []
    for (a, b), work in zip(gaps, load):
        if not work:
            continue
        speed = sum(work.values(), Fraction(0)) / (b - a)
        t = a
        ids = list(work)
        for pos in rng.permutation(len(ids)).tolist():
            dur = work[ids[pos]] / speed
            segs.append(Segment(ids[pos], proc, t, t + dur, speed))
            t += dur
    return Schedule(tuple(merge_segments(segs)), PREEMPTIVE).sorted()
