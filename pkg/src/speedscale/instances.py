"""Seeded instance generators."""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .model import MULTI, SINGLE, Instance, Job, ParameterError, Processor, ProcessorSet

KINDS = ("random", "agreeable", "equal-work", "nested")


def _processors(m: int, alpha: float, alphas: Optional[Sequence[float]]) -> ProcessorSet:
    if alphas is None:
        alphas = [alpha] * m
    if len(alphas) != m:
        raise ParameterError(f"expected {m} alphas, got {len(alphas)}")
    return ProcessorSet(tuple(Processor(i, float(a)) for i, a in enumerate(alphas)))


def _base_windows(kind: str, n: int, rng: np.random.Generator, horizon: int, max_len: int):
    if kind == "agreeable":
        rel = np.sort(rng.integers(0, horizon, n))
        out, last = [], 0
        for r in rel:
            d = max(int(r) + int(rng.integers(1, max_len + 1)), last)
            out.append((int(r), d))
            last = d
        return out
    if kind == "nested":
        out = [(0, horizon + max_len)]
        for _ in range(n - 1):
            r = int(rng.integers(1, horizon))
            out.append((r, r + int(rng.integers(1, max_len + 1))))
        order = rng.permutation(n)
        return [out[k] for k in order]
    out = []
    for _ in range(n):
        r = int(rng.integers(0, horizon))
        out.append((r, r + int(rng.integers(1, max_len + 1))))
    return out


def generate(kind: str, n: int, m: int = 1, seed: int = 0, *, alpha: float = 2.0,
             alphas: Optional[Sequence[float]] = None, horizon: Optional[int] = None,
             max_len: Optional[int] = None, max_work: int = 5,
             eligibility: float = 0.8, mode: Optional[str] = None) -> Instance:
    """Deterministic instance for ``(kind, n, m, seed, params)``.

    Times and works are integers.  In multi mode each processor sees the
    base window shifted by at most one time unit and its own work, and each
    job is eligible on a processor with probability ``eligibility`` (always
    on at least one).  ``equal-work`` gives every job the same work on a
    given processor.
    """
    if kind not in KINDS:
        raise ParameterError(f"unknown instance kind {kind!r}; expected one of {KINDS}")
    if n < 1 or m < 1:
        raise ParameterError("n and m must be positive")
    if kind == "nested" and n < 2:
        raise ParameterError("a nested instance needs at least two jobs")
    if max_work < 1:
        raise ParameterError("max_work must be at least 1")
    horizon = horizon or max(2, 2 * n)
    max_len = max_len or max(2, horizon // 2)
    rng = np.random.default_rng(seed)
    procs = _processors(m, alpha, alphas)
    windows = _base_windows(kind, n, rng, horizon, max_len)
    per_proc_work = [int(rng.integers(1, max_work + 1)) for _ in range(m)]

    jobs: List[Job] = []
    for k, (r, d) in enumerate(windows):
        if m == 1:
            w = per_proc_work[0] if kind == "equal-work" else int(rng.integers(1, max_work + 1))
            jobs.append(Job.simple(k, w, r, d))
            continue
        eligible = [i for i in range(m) if rng.random() < eligibility]
        if not eligible:
            eligible = [int(rng.integers(0, m))]
        works, rels, dls = {}, {}, {}
        for i in eligible:
            if kind in ("agreeable", "nested"):
                ri, di = r, d
            else:
                ri = max(0, r + int(rng.integers(-1, 2)))
                di = max(ri + 1, d + int(rng.integers(-1, 2)))
            works[i] = Fraction(per_proc_work[i] if kind == "equal-work"
                                else int(rng.integers(1, max_work + 1)))
            rels[i], dls[i] = Fraction(ri), Fraction(di)
        jobs.append(Job(k, works, rels, dls))
    return Instance(mode or (SINGLE if m == 1 else MULTI), tuple(jobs), procs)
