"""Core domain types: jobs, processors, instances, schedules and energy.

Times and works are exact :class:`fractions.Fraction` values.  Energies are
floats, since ``s ** alpha`` is irrational for fractional ``alpha``.

Every job stores its parameters per processor (``works``, ``releases``,
``deadlines`` keyed by processor id).  A single-mode instance simply has one
processor, and the scalar accessors :attr:`Job.work`, :attr:`Job.release` and
:attr:`Job.deadline` are available there.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

JobId = Hashable
Number = Union[int, float, str, Fraction]

SINGLE = "single"
MULTI = "multi"
PREEMPTIVE = "preemptive"
NON_PREEMPTIVE = "non-preemptive"

ENERGY_RTOL = 1e-9
WORK_RTOL = 1e-6


class SpeedScaleError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SpeedScaleError, ValueError):
    """Invalid argument or malformed instance data."""


class UnknownReferenceError(SpeedScaleError, KeyError):
    """A schedule refers to a job or processor that is not in the instance."""


class UnsupportedModeError(SpeedScaleError):
    """Operation called on an instance of the wrong mode."""


class InfeasibleError(SpeedScaleError):
    """No schedule exists at the requested granularity."""


class InternalError(SpeedScaleError, AssertionError):
    """A guarantee of the algorithm was violated at runtime."""


def as_fraction(value: Number) -> Fraction:
    """Convert ints, ``"p/q"`` strings and floats to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParameterError(f"not a number: {value!r}")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ParameterError(f"not a finite number: {value!r}")
        # decimal repr, not the binary expansion: 0.1 -> 1/10
        return Fraction(repr(value))
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"not a rational number: {value!r}") from exc


@dataclass(frozen=True)
class Processor:
    id: int
    alpha: float

    def __post_init__(self):
        if not self.alpha > 1:
            raise ParameterError(f"processor {self.id}: alpha must be > 1, got {self.alpha}")


@dataclass(frozen=True)
class ProcessorSet:
    processors: Tuple[Processor, ...]

    def __post_init__(self):
        if not self.processors:
            raise ParameterError("at least one processor is required")
        ids = [p.id for p in self.processors]
        if len(set(ids)) != len(ids):
            raise ParameterError(f"duplicate processor ids: {ids}")

    @property
    def alpha_max(self) -> float:
        return max(p.alpha for p in self.processors)

    @property
    def ids(self) -> List[int]:
        return [p.id for p in self.processors]

    def alpha(self, processor: int) -> float:
        for p in self.processors:
            if p.id == processor:
                return p.alpha
        raise UnknownReferenceError(f"unknown processor {processor!r}")

    def __len__(self):
        return len(self.processors)

    def __iter__(self):
        return iter(self.processors)


@dataclass(frozen=True, eq=True)
class Job:
    """A job with per-processor work, release date and deadline.

    A processor missing from ``works`` means the job is not eligible there.
    """

    id: JobId
    works: Mapping[int, Fraction]
    releases: Mapping[int, Fraction]
    deadlines: Mapping[int, Fraction]

    def __post_init__(self):
        keys = set(self.works)
        if not keys:
            raise ParameterError(f"job {self.id!r} is eligible on no processor")
        if set(self.releases) != keys or set(self.deadlines) != keys:
            raise ParameterError(f"job {self.id!r}: work/release/deadline maps disagree on processors")
        for i in keys:
            w, r, d = self.works[i], self.releases[i], self.deadlines[i]
            if not w > 0:
                raise ParameterError(f"job {self.id!r}: work must be positive on processor {i}")
            if r < 0:
                raise ParameterError(f"job {self.id!r}: negative release date on processor {i}")
            if not r < d:
                raise ParameterError(f"job {self.id!r}: release must precede deadline on processor {i}")

    @classmethod
    def simple(cls, id: JobId, work: Number, release: Number, deadline: Number,
               processor: int = 0) -> "Job":
        """Job for a single-processor instance."""
        return cls(id, {processor: as_fraction(work)}, {processor: as_fraction(release)},
                   {processor: as_fraction(deadline)})

    @property
    def eligible(self) -> List[int]:
        return sorted(self.works)

    def _only(self, mapping):
        if len(mapping) != 1:
            raise UnsupportedModeError(f"job {self.id!r} has per-processor parameters")
        return next(iter(mapping.values()))

    @property
    def work(self) -> Fraction:
        return self._only(self.works)

    @property
    def release(self) -> Fraction:
        return self._only(self.releases)

    @property
    def deadline(self) -> Fraction:
        return self._only(self.deadlines)

    def window(self, processor: int) -> Tuple[Fraction, Fraction]:
        return self.releases[processor], self.deadlines[processor]

    def on(self, processor: int) -> "Job":
        """This job restricted to one processor."""
        return Job(self.id, {processor: self.works[processor]},
                   {processor: self.releases[processor]},
                   {processor: self.deadlines[processor]})


@dataclass(frozen=True)
class Instance:
    mode: str
    jobs: Tuple[Job, ...]
    processors: ProcessorSet

    def __post_init__(self):
        if self.mode not in (SINGLE, MULTI):
            raise ParameterError(f"unknown mode {self.mode!r}")
        if not self.jobs:
            raise ParameterError("an instance needs at least one job")
        if self.mode == SINGLE and len(self.processors) != 1:
            raise ParameterError("a single-mode instance has exactly one processor")
        ids = [j.id for j in self.jobs]
        if len(set(ids)) != len(ids):
            raise ParameterError("duplicate job ids")
        known = set(self.processors.ids)
        for j in self.jobs:
            extra = set(j.works) - known
            if extra:
                raise ParameterError(f"job {j.id!r} refers to unknown processors {sorted(extra)}")

    @classmethod
    def single(cls, alpha: float, jobs: Iterable[Tuple[JobId, Number, Number, Number]],
               processor: int = 0) -> "Instance":
        """Build a single-mode instance from ``(id, work, release, deadline)`` tuples."""
        return cls(SINGLE, tuple(Job.simple(*j, processor=processor) for j in jobs),
                   ProcessorSet((Processor(processor, float(alpha)),)))

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def m(self) -> int:
        return len(self.processors)

    @property
    def alpha(self) -> float:
        """Alpha of the only processor (single mode) or the max alpha."""
        return self.processors.alpha_max

    def job(self, job_id: JobId) -> Job:
        for j in self.jobs:
            if j.id == job_id:
                return j
        raise UnknownReferenceError(f"unknown job {job_id!r}")

    def job_index(self) -> Dict[JobId, int]:
        return {j.id: k for k, j in enumerate(self.jobs)}

    def all_works(self) -> List[Fraction]:
        return [w for j in self.jobs for w in j.works.values()]

    @property
    def w_max(self) -> Fraction:
        return max(self.all_works())

    @property
    def w_min(self) -> Fraction:
        return min(self.all_works())

    def jobs_on(self, processor: int) -> List[Job]:
        return [j for j in self.jobs if processor in j.works]

    def restrict(self, processor: int, job_ids: Optional[Iterable[JobId]] = None) -> "Instance":
        """Single-mode instance of the given jobs with their parameters on ``processor``."""
        wanted = None if job_ids is None else set(job_ids)
        jobs = tuple(j.on(processor) for j in self.jobs
                     if processor in j.works and (wanted is None or j.id in wanted))
        if not jobs:
            raise ParameterError(f"no jobs to place on processor {processor}")
        proc = Processor(processor, self.processors.alpha(processor))
        return Instance(SINGLE, jobs, ProcessorSet((proc,)))


@dataclass(frozen=True)
class Segment:
    job: JobId
    processor: int
    start: Fraction
    end: Fraction
    speed: Fraction

    def __post_init__(self):
        if not self.start < self.end:
            raise ParameterError(f"segment of job {self.job!r} has start >= end")
        if not self.speed > 0:
            raise ParameterError(f"segment of job {self.job!r} has non-positive speed")

    @property
    def duration(self) -> Fraction:
        return self.end - self.start

    @property
    def work(self) -> Fraction:
        return self.speed * (self.end - self.start)


@dataclass(frozen=True)
class Schedule:
    segments: Tuple[Segment, ...]
    kind: str = PREEMPTIVE

    def __post_init__(self):
        if self.kind not in (PREEMPTIVE, NON_PREEMPTIVE):
            raise ParameterError(f"unknown schedule kind {self.kind!r}")

    def by_job(self) -> Dict[JobId, List[Segment]]:
        out: Dict[JobId, List[Segment]] = defaultdict(list)
        for s in self.segments:
            out[s.job].append(s)
        for segs in out.values():
            segs.sort(key=lambda s: s.start)
        return dict(out)

    def by_processor(self) -> Dict[int, List[Segment]]:
        out: Dict[int, List[Segment]] = defaultdict(list)
        for s in self.segments:
            out[s.processor].append(s)
        for segs in out.values():
            segs.sort(key=lambda s: (s.start, s.end))
        return dict(out)

    def jobs(self) -> List[JobId]:
        seen = {}
        for s in self.segments:
            seen.setdefault(s.job, None)
        return list(seen)

    def on_processor(self, processor: int) -> "Schedule":
        return Schedule(tuple(s for s in self.segments if s.processor == processor), self.kind)

    def sorted(self) -> "Schedule":
        return Schedule(tuple(sorted(self.segments, key=lambda s: (s.processor, s.start, s.end))),
                        self.kind)


def merge_segments(segments: Iterable[Segment]) -> List[Segment]:
    """Merge abutting segments of the same job, processor and speed."""
    out: List[Segment] = []
    for s in sorted(segments, key=lambda s: (s.processor, s.start, s.end)):
        if out:
            p = out[-1]
            if (p.job == s.job and p.processor == s.processor and p.end == s.start
                    and p.speed == s.speed):
                out[-1] = Segment(p.job, p.processor, p.start, s.end, p.speed)
                continue
        out.append(s)
    return out


@dataclass(frozen=True)
class EnergyReport:
    total: float
    per_processor: Dict[int, float]
    per_job: Dict[JobId, float]


def segment_energy(segment: Segment, alpha: float) -> float:
    return float(segment.speed) ** alpha * float(segment.duration)


def energy(schedule: Schedule, instance: Instance) -> EnergyReport:
    """Energy of a schedule: each segment costs ``speed**alpha * length``."""
    known = instance.job_index()
    per_proc: Dict[int, float] = {p.id: 0.0 for p in instance.processors}
    per_job: Dict[JobId, float] = {}
    for s in schedule.segments:
        if s.job not in known:
            raise UnknownReferenceError(f"schedule refers to unknown job {s.job!r}")
        if s.processor not in per_proc:
            raise UnknownReferenceError(f"schedule refers to unknown processor {s.processor!r}")
        e = segment_energy(s, instance.processors.alpha(s.processor))
        per_proc[s.processor] += e
        per_job[s.job] = per_job.get(s.job, 0.0) + e
    return EnergyReport(math.fsum(per_proc.values()), per_proc, per_job)


def total_energy(schedule: Schedule, instance: Instance) -> float:
    return energy(schedule, instance).total


@dataclass(frozen=True)
class Violation:
    kind: str
    job: Optional[JobId]
    processor: Optional[int]
    message: str

    def __str__(self):
        return f"{self.kind}: {self.message}"


@dataclass(frozen=True)
class VerificationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> List[str]:
        return [v.kind for v in self.violations]


def verify(schedule: Schedule, instance: Instance, kind: Optional[str] = None,
           work_rtol: float = WORK_RTOL) -> VerificationReport:
    """Check a schedule against the feasibility rules and list every violation.

    Under ``kind="non-preemptive"`` a job's segments must form a single
    uninterrupted run on one processor: consecutive segments must abut
    exactly, though the speed may change from one segment to the next.
    """
    kind = kind or schedule.kind
    out: List[Violation] = []
    known = instance.job_index()
    procs = set(instance.processors.ids)

    for s in schedule.segments:
        if s.job not in known:
            out.append(Violation("unknown job", s.job, s.processor, f"job {s.job!r} is not in the instance"))
            continue
        if s.processor not in procs:
            out.append(Violation("unknown processor", s.job, s.processor,
                                 f"processor {s.processor!r} is not in the instance"))
            continue
        job = instance.jobs[known[s.job]]
        if s.processor not in job.works:
            out.append(Violation("eligibility", s.job, s.processor,
                                 f"job {s.job!r} is not eligible on processor {s.processor}"))
            continue
        r, d = job.window(s.processor)
        if s.start < r or s.end > d:
            out.append(Violation("life interval", s.job, s.processor,
                                 f"job {s.job!r} runs in [{s.start}, {s.end}] outside [{r}, {d}]"))

    for proc, segs in schedule.by_processor().items():
        for a, b in zip(segs, segs[1:]):
            if b.start < a.end:
                out.append(Violation("overlap", b.job, proc,
                                     f"jobs {a.job!r} and {b.job!r} overlap on processor {proc} "
                                     f"at [{b.start}, {min(a.end, b.end)}]"))

    runs = schedule.by_job()
    for job in instance.jobs:
        segs = runs.get(job.id, [])
        used = sorted({s.processor for s in segs})
        if len(used) > 1:
            out.append(Violation("migration", job.id, None,
                                 f"job {job.id!r} runs on processors {used}"))
        if kind == NON_PREEMPTIVE:
            for a, b in zip(segs, segs[1:]):
                if a.end != b.start or a.processor != b.processor:
                    out.append(Violation("preemption", job.id, b.processor,
                                         f"job {job.id!r} is interrupted at {a.end}"))
                    break
        if not segs:
            out.append(Violation("work", job.id, None, f"job {job.id!r} is never executed"))
            continue
        proc = used[0]
        if proc not in job.works:
            continue
        required = job.works[proc]
        done = sum((s.work for s in segs if s.processor == proc), Fraction(0))
        if abs(float(done - required)) > work_rtol * float(required):
            out.append(Violation("work", job.id, proc,
                                 f"job {job.id!r} executes {float(done):.9g} of {float(required):.9g} work"))
    return VerificationReport(tuple(out))


def stats(instance: Instance) -> Tuple[int, int, Fraction, Fraction, float]:
    """``(n, m, w_max, w_min, alpha_max)``."""
    return instance.n, instance.m, instance.w_max, instance.w_min, instance.processors.alpha_max


def nested_pairs(windows: Sequence[Tuple[Fraction, Fraction]]) -> List[Tuple[int, int]]:
    """Pairs ``(outer, inner)`` whose windows are strictly nested on both ends."""
    out = []
    order = sorted(range(len(windows)), key=lambda k: windows[k])
    for a_pos, a in enumerate(order):
        ra, da = windows[a]
        for b in order[a_pos + 1:]:
            rb, db = windows[b]
            if rb > ra and db < da:
                out.append((a, b))
    return out


def is_agreeable(instance: Instance) -> bool:
    """True iff no job's window is strictly nested inside another's.

    Equal release dates (or equal deadlines) never break agreeability; the
    earliest-deadline-first argument only needs the absence of pairs with
    ``r_j < r_i`` and ``d_i < d_j``.
    """
    if instance.mode != SINGLE:
        raise UnsupportedModeError("is_agreeable is defined for single-mode instances")
    return not nested_pairs([(j.release, j.deadline) for j in instance.jobs])
