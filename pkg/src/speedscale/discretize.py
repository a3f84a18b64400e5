"""Landmark slot grid and per-job configurations.

Landmarks are the distinct release dates and deadlines.  Every gap between
consecutive landmarks is cut into the same number of equal slots, so each
job's life interval is exactly a union of whole slots.

A configuration of a job is a run of consecutive slots inside its life
interval whose time span contains no other job's entire life interval.
Configurations are kept as ``(first, last)`` slot index pairs.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .model import Instance, Job, JobId, Number, ParameterError, as_fraction


@dataclass(frozen=True)
class SlotGrid:
    landmarks: Tuple[Fraction, ...]
    boundaries: Tuple[Fraction, ...]
    slots_per_gap: int
    processor: int = 0

    @property
    def n_slots(self) -> int:
        return len(self.boundaries) - 1

    @property
    def slots(self) -> List[Tuple[Fraction, Fraction]]:
        b = self.boundaries
        return [(b[k], b[k + 1]) for k in range(len(b) - 1)]

    def slot_length(self, k: int) -> Fraction:
        return self.boundaries[k + 1] - self.boundaries[k]

    def index(self, t: Fraction) -> int:
        """Position of ``t`` in the boundary list; ``t`` must be a boundary."""
        k = bisect_left(self.boundaries, t)
        if k == len(self.boundaries) or self.boundaries[k] != t:
            raise ParameterError(f"{t} is not a slot boundary")
        return k

    def slot_range(self, start: Fraction, end: Fraction) -> range:
        """Indices of the slots that tile ``[start, end]``."""
        return range(self.index(start), self.index(end))


@dataclass(frozen=True)
class Configuration:
    job: JobId
    first_slot: int
    last_slot: int
    start: Fraction
    end: Fraction
    processor: int = 0

    @property
    def length(self) -> Fraction:
        return self.end - self.start

    @property
    def slots(self) -> range:
        return range(self.first_slot, self.last_slot + 1)

    def __contains__(self, slot: int) -> bool:
        return self.first_slot <= slot <= self.last_slot


def _jobs_on(instance: Instance, processor: Optional[int]) -> Tuple[int, List[Job]]:
    if processor is None:
        if instance.m != 1:
            raise ParameterError("processor must be given for multi-processor instances")
        processor = instance.processors.ids[0]
    return processor, instance.jobs_on(processor)


def landmarks(instance: Instance, processor: Optional[int] = None) -> List[Fraction]:
    processor, jobs = _jobs_on(instance, processor)
    times = set()
    for j in jobs:
        times.update(j.window(processor))
    return sorted(times)


def slots_per_gap(n: int, epsilon: Number, slot_cap: Optional[int] = None) -> int:
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    if slot_cap is not None and slot_cap < 1:
        raise ParameterError(f"slot_cap must be a positive integer, got {slot_cap}")
    count = math.ceil(n * n * (1 + 1 / eps))
    if slot_cap is not None:
        count = min(count, slot_cap)
    return count


def build_grid(instance: Instance, epsilon: Number, slot_cap: Optional[int] = None,
               processor: Optional[int] = None) -> SlotGrid:
    """Split every landmark gap into ``ceil(n^2 (1 + 1/eps))`` equal slots.

    ``n`` is the number of jobs in the whole instance.  ``slot_cap`` clamps
    the per-gap count.
    """
    per_gap = slots_per_gap(instance.n, epsilon, slot_cap)
    processor, _ = _jobs_on(instance, processor)
    marks = landmarks(instance, processor)
    bounds = [marks[0]]
    for a, b in zip(marks, marks[1:]):
        step = (b - a) / per_gap
        bounds.extend(a + step * k for k in range(1, per_gap))
        bounds.append(b)
    return SlotGrid(tuple(marks), tuple(bounds), per_gap, processor)


def config_ranges(job: Job, instance: Instance, grid: SlotGrid) -> Tuple[np.ndarray, np.ndarray]:
    """``(first, last)`` slot index arrays of every configuration of ``job``.

    Ordered by first slot, then by last slot.
    """
    proc = grid.processor
    lo = grid.index(job.releases[proc])
    hi = grid.index(job.deadlines[proc])
    # a run [first, last] contains job k's slots [lo_k, hi_k) iff first <= lo_k and last >= hi_k - 1
    bound = np.full(grid.n_slots + 1, hi - 1, dtype=np.int64)
    for k in instance.jobs_on(proc):
        if k.id == job.id:
            continue
        lo_k = grid.index(k.releases[proc])
        hi_k = grid.index(k.deadlines[proc])
        bound[lo_k] = min(bound[lo_k], hi_k - 2)
    # suffix minimum: every job starting at or after `first` limits the run
    last_max = np.minimum.accumulate(bound[::-1])[::-1][lo:hi]
    firsts = np.arange(lo, hi, dtype=np.int64)
    counts = np.maximum(last_max - firsts + 1, 0)
    first_rep = np.repeat(firsts, counts)
    offsets = np.arange(counts.sum(), dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts)
    return first_rep, first_rep + offsets


def enumerate_configs(job: Job, instance: Instance, grid: SlotGrid) -> List[Configuration]:
    """All configurations of ``job`` on the grid's processor."""
    b = grid.boundaries
    firsts, lasts = config_ranges(job, instance, grid)
    return [Configuration(job.id, int(f), int(l), b[f], b[l + 1], grid.processor)
            for f, l in zip(firsts.tolist(), lasts.tolist())]


def config_energy(work: Number, length: Number, alpha: float) -> float:
    """Energy of running ``work`` at constant speed over ``length`` time."""
    length = float(length)
    if not length > 0:
        raise ParameterError("configuration length must be positive")
    return float(work) ** alpha / length ** (alpha - 1)


def all_configs(instance: Instance, grid: SlotGrid) -> Dict[JobId, List[Configuration]]:
    return {j.id: enumerate_configs(j, instance, grid) for j in instance.jobs_on(grid.processor)}


def contains_life_interval(span: Tuple[Fraction, Fraction],
                           windows: Sequence[Tuple[Fraction, Fraction]]) -> bool:
    a, b = span
    return any(a <= r and d <= b for r, d in windows)
