"""Optimal preemptive single-processor schedule by critical-interval peeling.

Repeatedly pick the interval ``[a, b]`` with the highest density (work of
the jobs whose windows lie inside it, over the still-free time in it), run
those jobs there at that density by earliest deadline first, and block the
interval for everything that is left.  Working with free time in real
coordinates is the same as contracting the interval away.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

from .model import (
    PREEMPTIVE, SINGLE, Instance, InternalError, JobId, Schedule, Segment,
    UnsupportedModeError, merge_segments, total_energy,
)


@dataclass(frozen=True)
class CriticalInterval:
    start: Fraction
    end: Fraction
    density: Fraction
    jobs: Tuple[JobId, ...]


@dataclass(frozen=True)
class YdsResult:
    schedule: Schedule
    energy: float
    intervals: Tuple[CriticalInterval, ...]


def _free_parts(busy: List[Tuple[Fraction, Fraction]], a: Fraction, b: Fraction):
    """Maximal sub-intervals of ``[a, b]`` not covered by ``busy`` (sorted, disjoint)."""
    out, t = [], a
    for s, e in busy:
        if e <= t:
            continue
        if s >= b:
            break
        if s > t:
            out.append((t, s))
        t = max(t, e)
    if t < b:
        out.append((t, b))
    return out


def _free_length(busy, a, b) -> Fraction:
    return sum((e - s for s, e in _free_parts(busy, a, b)), Fraction(0))


def _edf_fill(jobs, speed: Fraction, parts, processor: int) -> List[Segment]:
    """Preemptive EDF of ``jobs`` (index, id, work, release, deadline) over ``parts``."""
    left = {k: w / speed for k, _, w, _, _ in jobs}
    info = {k: (jid, r, d) for k, jid, _, r, d in jobs}
    segs = []
    for lo, hi in parts:
        t = lo
        while t < hi:
            ready = [k for k in left if left[k] > 0 and info[k][1] <= t]
            future = [info[k][1] for k in left if left[k] > 0 and info[k][1] > t]
            nxt = min([hi] + [r for r in future if r < hi])
            if not ready:
                if nxt == t:
                    break
                t = nxt
                continue
            k = min(ready, key=lambda q: (info[q][2], info[q][1], q))
            end = min(nxt, t + left[k])
            if end > info[k][2]:
                raise InternalError(f"critical interval misses deadline of job {info[k][0]!r}")
            segs.append(Segment(info[k][0], processor, t, end, speed))
            left[k] -= end - t
            t = end
    if any(v > 0 for v in left.values()):
        raise InternalError("critical interval does not hold its jobs")
    return segs


def yds_schedule(instance: Instance) -> YdsResult:
    """Minimum-energy preemptive schedule of a single-mode instance.

    Density ties go to the leftmost interval, then the shortest.
    """
    if instance.mode != SINGLE:
        raise UnsupportedModeError("yds_schedule needs a single-mode instance")
    proc = instance.processors.ids[0]
    remaining = [(k, j.id, j.work, j.release, j.deadline) for k, j in enumerate(instance.jobs)]
    busy: List[Tuple[Fraction, Fraction]] = []
    segs: List[Segment] = []
    intervals = []
    while remaining:
        starts = sorted({r for _, _, _, r, _ in remaining})
        ends = sorted({d for _, _, _, _, d in remaining})
        best = None
        for a in starts:
            for b in ends:
                if b <= a:
                    continue
                inside = [job for job in remaining if a <= job[3] and job[4] <= b]
                if not inside:
                    continue
                free = _free_length(busy, a, b)
                if free <= 0:
                    raise InternalError(f"no free time left in [{a}, {b}]")
                dens = sum((job[2] for job in inside), Fraction(0)) / free
                key = (-dens, a, b)
                if best is None or key < best[0]:
                    best = (key, a, b, dens, inside)
        _, a, b, dens, inside = best
        segs.extend(_edf_fill(inside, dens, _free_parts(busy, a, b), proc))
        intervals.append(CriticalInterval(a, b, dens, tuple(job[1] for job in inside)))
        busy = _merge_busy(busy + [(a, b)])
        taken = {job[0] for job in inside}
        remaining = [job for job in remaining if job[0] not in taken]
    schedule = Schedule(tuple(merge_segments(segs)), PREEMPTIVE).sorted()
    return YdsResult(schedule, total_energy(schedule, instance), tuple(intervals))


def _merge_busy(busy):
    out = []
    for s, e in sorted(busy):
        if out and s <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], e))
        else:
            out.append((s, e))
    return out


def yds_energy(instance: Instance) -> float:
    return yds_schedule(instance).energy
