"""Instance and schedule files.

Both are JSON documents with a ``version`` field.  Times, works and speeds
are written as ``"p/q"`` strings so slot boundaries survive exactly.  A
schedule records the SHA-256 of the canonical serialization of the instance
it was computed for.  Schedules can also be written as CSV, one segment per
line, with the header fields carried in ``#`` comment lines.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional, TextIO, Tuple

from .model import (
    MULTI, NON_PREEMPTIVE, PREEMPTIVE, SINGLE, Instance, Job, Processor, ProcessorSet,
    Schedule, Segment, SpeedScaleError,
)

FORMAT_VERSION = 1


class FormatError(SpeedScaleError):
    """Malformed or unsupported file content."""


class ChecksumError(SpeedScaleError):
    """A schedule was computed for a different instance."""


def frac(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(value: Any, what: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str, float)):
        raise FormatError(f"{what}: expected a number or 'p/q' string, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"{what}: cannot parse {value!r}") from exc


def _check_keys(obj: Any, required: set, optional: set, what: str):
    if not isinstance(obj, dict):
        raise FormatError(f"{what}: expected an object")
    missing = required - obj.keys()
    if missing:
        raise FormatError(f"{what}: missing fields {sorted(missing)}")
    unknown = obj.keys() - required - optional
    if unknown:
        raise FormatError(f"{what}: unknown fields {sorted(unknown)}")


def _check_version(obj: dict, what: str):
    if obj.get("version") != FORMAT_VERSION:
        raise FormatError(f"{what}: unsupported version {obj.get('version')!r}")


def instance_to_dict(instance: Instance) -> Dict[str, Any]:
    if instance.mode == SINGLE:
        proc = instance.processors.ids[0]
        out: Dict[str, Any] = {"version": FORMAT_VERSION, "mode": SINGLE, "alpha": instance.alpha}
        if proc != 0:
            out["processor"] = proc
        out["jobs"] = [{"id": j.id, "work": frac(j.work), "release": frac(j.release),
                        "deadline": frac(j.deadline)} for j in instance.jobs]
        return out
    ids = instance.processors.ids
    if ids != list(range(len(ids))):
        raise FormatError("multi-mode files need processors numbered 0..m-1")
    return {
        "version": FORMAT_VERSION,
        "mode": MULTI,
        "alpha": [instance.processors.alpha(p) for p in ids],
        "jobs": [{"id": j.id,
                  "works": {str(p): frac(w) for p, w in sorted(j.works.items())},
                  "releases": {str(p): frac(v) for p, v in sorted(j.releases.items())},
                  "deadlines": {str(p): frac(v) for p, v in sorted(j.deadlines.items())}}
                 for j in instance.jobs],
    }


def _job_id(value: Any, what: str):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise FormatError(f"{what}: job id must be an integer or string")
    return value


def _per_processor(obj: Any, m: int, what: str) -> Dict[int, Fraction]:
    if not isinstance(obj, dict):
        raise FormatError(f"{what}: expected an object keyed by processor")
    out = {}
    for key, value in obj.items():
        try:
            p = int(key)
        except ValueError as exc:
            raise FormatError(f"{what}: bad processor key {key!r}") from exc
        if not 0 <= p < m:
            raise FormatError(f"{what}: processor {p} out of range")
        out[p] = parse_frac(value, f"{what}[{key}]")
    return out


def instance_from_dict(obj: Any) -> Instance:
    if not isinstance(obj, dict):
        raise FormatError("instance: expected an object")
    _check_version(obj, "instance")
    mode = obj.get("mode")
    try:
        if mode == SINGLE:
            _check_keys(obj, {"version", "mode", "alpha", "jobs"}, {"processor"}, "instance")
            proc = obj.get("processor", 0)
            if not isinstance(obj["jobs"], list):
                raise FormatError("instance: jobs must be a list")
            jobs = []
            for k, rec in enumerate(obj["jobs"]):
                what = f"job #{k}"
                _check_keys(rec, {"id", "work", "release", "deadline"}, set(), what)
                jobs.append(Job.simple(_job_id(rec["id"], what), parse_frac(rec["work"], what + " work"),
                                       parse_frac(rec["release"], what + " release"),
                                       parse_frac(rec["deadline"], what + " deadline"), proc))
            alpha = obj["alpha"]
            if isinstance(alpha, bool) or not isinstance(alpha, (int, float)):
                raise FormatError("instance: alpha must be a number")
            return Instance(SINGLE, tuple(jobs), ProcessorSet((Processor(proc, float(alpha)),)))
        if mode == MULTI:
            _check_keys(obj, {"version", "mode", "alpha", "jobs"}, set(), "instance")
            alphas = obj["alpha"]
            if not isinstance(alphas, list) or not alphas:
                raise FormatError("instance: multi-mode alpha must be a non-empty list")
            m = len(alphas)
            procs = ProcessorSet(tuple(Processor(i, float(a)) for i, a in enumerate(alphas)))
            if not isinstance(obj["jobs"], list):
                raise FormatError("instance: jobs must be a list")
            jobs = []
            for k, rec in enumerate(obj["jobs"]):
                what = f"job #{k}"
                _check_keys(rec, {"id", "works", "releases", "deadlines"}, set(), what)
                jobs.append(Job(_job_id(rec["id"], what), _per_processor(rec["works"], m, what + " works"),
                                _per_processor(rec["releases"], m, what + " releases"),
                                _per_processor(rec["deadlines"], m, what + " deadlines")))
            return Instance(MULTI, tuple(jobs), procs)
    except FormatError:
        raise
    except (SpeedScaleError, TypeError, ValueError) as exc:
        raise FormatError(f"instance: {exc}") from exc
    raise FormatError(f"instance: unknown mode {mode!r}")


def canonical(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), sort_keys=True, separators=(",", ":"))


def checksum(instance: Instance) -> str:
    return hashlib.sha256(canonical(instance).encode("utf-8")).hexdigest()


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def loads_instance(text: str) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"instance: invalid JSON ({exc})") from exc
    return instance_from_dict(obj)


def schedule_to_dict(schedule: Schedule, instance: Instance,
                     metadata: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return {
        "version": FORMAT_VERSION,
        "instance_checksum": checksum(instance),
        "kind": schedule.kind,
        "segments": [{"job": s.job, "processor": s.processor, "start": frac(s.start),
                      "end": frac(s.end), "speed": frac(s.speed)} for s in schedule.segments],
        "metadata": metadata or {},
    }


def _segment(rec: Any, k: int) -> Segment:
    what = f"segment #{k}"
    _check_keys(rec, {"job", "processor", "start", "end", "speed"}, set(), what)
    proc = rec["processor"]
    if isinstance(proc, str) and proc.lstrip("-").isdigit():
        proc = int(proc)
    if isinstance(proc, bool) or not isinstance(proc, int):
        raise FormatError(f"{what}: processor must be an integer")
    try:
        return Segment(_job_id(rec["job"], what), proc, parse_frac(rec["start"], what + " start"),
                       parse_frac(rec["end"], what + " end"), parse_frac(rec["speed"], what + " speed"))
    except FormatError:
        raise
    except (SpeedScaleError, ValueError) as exc:
        raise FormatError(f"{what}: {exc}") from exc


def schedule_from_dict(obj: Any) -> Tuple[Schedule, str, Dict[str, Any]]:
    """Returns ``(schedule, instance checksum, metadata)``."""
    if not isinstance(obj, dict):
        raise FormatError("schedule: expected an object")
    _check_version(obj, "schedule")
    _check_keys(obj, {"version", "instance_checksum", "kind", "segments"}, {"metadata"}, "schedule")
    if obj["kind"] not in (PREEMPTIVE, NON_PREEMPTIVE):
        raise FormatError(f"schedule: unknown kind {obj['kind']!r}")
    if not isinstance(obj["segments"], list):
        raise FormatError("schedule: segments must be a list")
    segs = tuple(_segment(rec, k) for k, rec in enumerate(obj["segments"]))
    return Schedule(segs, obj["kind"]), str(obj["instance_checksum"]), obj.get("metadata") or {}


def dumps_schedule(schedule: Schedule, instance: Instance, metadata: Optional[Dict[str, Any]] = None,
                   fmt: str = "json") -> str:
    doc = schedule_to_dict(schedule, instance, metadata)
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    if fmt != "csv":
        raise FormatError(f"unknown schedule format {fmt!r}")
    buf = io.StringIO()
    for key in ("version", "instance_checksum", "kind"):
        buf.write(f"# {key}={doc[key]}\n")
    buf.write(f"# metadata={json.dumps(doc['metadata'], sort_keys=True)}\n")
    writer = csv.DictWriter(buf, fieldnames=["job", "processor", "start", "end", "speed"],
                            lineterminator="\n")
    writer.writeheader()
    writer.writerows(doc["segments"])
    return buf.getvalue()


def loads_schedule(text: str) -> Tuple[Schedule, str, Dict[str, Any]]:
    """Parse a JSON or CSV schedule file."""
    if text.lstrip().startswith("{"):
        try:
            return schedule_from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise FormatError(f"schedule: invalid JSON ({exc})") from exc
    header: Dict[str, Any] = {}
    body: List[str] = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if not sep:
                raise FormatError(f"schedule: bad header line {line!r}")
            header[key] = value
        elif line.strip():
            body.append(line)
    try:
        header["version"] = int(header.get("version", "0"))
        header["metadata"] = json.loads(header.get("metadata", "{}"))
    except (ValueError, json.JSONDecodeError) as exc:
        raise FormatError("schedule: bad CSV header") from exc
    rows = list(csv.DictReader(body))
    for row in rows:
        job = row.get("job")
        if isinstance(job, str) and job.lstrip("-").isdigit():
            row["job"] = int(job)
    header["segments"] = rows
    return schedule_from_dict(header)


def read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc


def write_text(path: Optional[str], text: str, stdout: Optional[TextIO] = None):
    if path is None or path == "-":
        (stdout or sys.stdout).write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc.strerror}") from exc
