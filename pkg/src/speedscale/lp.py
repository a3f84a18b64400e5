"""Configuration LP: one variable per (processor, job, configuration).

    minimise   sum x[i,j,c] * w[i,j]**alpha_i / |c|**(alpha_i - 1)
    subject to sum_{i,c} x[i,j,c] >= 1                for every job j
               sum_{j, c containing t} x[i,j,c] <= 1  for every slot t of processor i
               x >= 0

A single-processor instance is the special case with one processor.
Variables are stored as parallel arrays; :class:`LpVariable` objects are
only materialised on request.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, TextIO, Tuple

import numpy as np
import scipy.sparse as sp

from . import simplex
from .discretize import Configuration, SlotGrid, build_grid, config_ranges
from .model import InfeasibleError, Instance, JobId, Number

OPTIMAL = simplex.OPTIMAL
INFEASIBLE = simplex.INFEASIBLE
FEAS_TOL = 1e-7


@dataclass(frozen=True)
class LpVariable:
    processor: int
    job: JobId
    config: Configuration


@dataclass
class ConfigLp:
    """Rows are ordered cover rows (one per job) then capacity rows
    (one per processor slot, grouped by processor)."""

    job_ids: List[JobId]
    var_job: np.ndarray
    var_processor: np.ndarray
    first: np.ndarray
    last: np.ndarray
    cost: np.ndarray
    capacity_keys: List[Tuple[int, int]]
    cap_offset: Dict[int, int]
    grids: Dict[int, SlotGrid] = field(default_factory=dict)

    def __post_init__(self):
        order = np.argsort(self.var_job, kind="stable")
        splits = np.searchsorted(self.var_job[order], np.arange(len(self.job_ids) + 1))
        self._by_job = [order[splits[k]:splits[k + 1]] for k in range(len(self.job_ids))]
        self._job_row = {jid: k for k, jid in enumerate(self.job_ids)}

    @property
    def n_variables(self) -> int:
        return int(self.cost.size)

    @property
    def n_rows(self) -> int:
        return len(self.job_ids) + len(self.capacity_keys)

    def variables_of(self, job: JobId) -> np.ndarray:
        return self._by_job[self._job_row[job]]

    def variable(self, k: int) -> LpVariable:
        p = int(self.var_processor[k])
        f, l = int(self.first[k]), int(self.last[k])
        b = self.grids[p].boundaries
        jid = self.job_ids[int(self.var_job[k])]
        return LpVariable(p, jid, Configuration(jid, f, l, b[f], b[l + 1], p))

    @cached_property
    def variables(self) -> List[LpVariable]:
        return [self.variable(k) for k in range(self.n_variables)]

    def _cap_rows(self) -> Tuple[np.ndarray, np.ndarray]:
        off = np.array([self.cap_offset[int(p)] for p in self.var_processor], dtype=np.int64)
        return off + self.first, off + self.last

    @cached_property
    def cover(self) -> sp.csr_matrix:
        n = self.n_variables
        return sp.csr_matrix((np.ones(n), (self.var_job, np.arange(n))),
                             shape=(len(self.job_ids), n))

    @cached_property
    def capacity(self) -> sp.csr_matrix:
        lo, hi = self._cap_rows()
        counts = hi - lo + 1
        cols = np.repeat(np.arange(self.n_variables), counts)
        rows = np.repeat(lo, counts) + (np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts))
        return sp.csr_matrix((np.ones(rows.size), (rows, cols)),
                             shape=(len(self.capacity_keys), self.n_variables))

    def operator(self) -> "IntervalColumns":
        lo, hi = self._cap_rows()
        n_jobs = len(self.job_ids)
        return IntervalColumns(self.var_job, lo + n_jobs, hi + n_jobs, self.n_rows)

    def senses(self) -> np.ndarray:
        return np.concatenate([np.full(len(self.job_ids), simplex.GE),
                               np.full(len(self.capacity_keys), simplex.LE)])


class IntervalColumns:
    """Column operator for columns of the form ``e_job + e_lo + ... + e_hi``.

    Prices every column with two prefix-sum lookups.
    """

    def __init__(self, job_row: np.ndarray, lo: np.ndarray, hi: np.ndarray, m: int):
        self.job_row, self.lo, self.hi = job_row, lo, hi
        self.shape = (m, int(job_row.size))

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        prefix = np.concatenate([[0.0], np.cumsum(y)])
        return y[self.job_row] + prefix[self.hi + 1] - prefix[self.lo]

    def column(self, q: int) -> np.ndarray:
        a = np.zeros(self.shape[0])
        a[self.lo[q]:self.hi[q] + 1] = 1.0
        a[self.job_row[q]] += 1.0
        return a

    def submatrix(self, cols) -> np.ndarray:
        out = np.zeros((self.shape[0], len(cols)))
        for k, q in enumerate(cols):
            out[:, k] = self.column(int(q))
        return out


@dataclass
class LpSolution:
    lp: ConfigLp
    x: np.ndarray
    objective: float
    status: str
    iterations: int = 0

    def weights(self, job: JobId) -> List[Tuple[int, float]]:
        return [(int(k), float(self.x[k])) for k in self.lp.variables_of(job)]

    def support(self, tol: float = 1e-12) -> List[Tuple[LpVariable, float]]:
        return [(self.lp.variable(int(k)), float(self.x[k])) for k in np.flatnonzero(self.x > tol)]


def _assemble(instance: Instance, grids: Mapping[int, SlotGrid],
              ranges: Mapping[int, Mapping[JobId, Tuple[np.ndarray, np.ndarray]]]) -> ConfigLp:
    job_ids = [j.id for j in instance.jobs]
    procs = [p for p in instance.processors.ids if p in grids]
    cap_offset, keys = {}, []
    for p in procs:
        cap_offset[p] = len(keys)
        keys.extend((p, t) for t in range(grids[p].n_slots))

    parts = []
    # job-major order; with one processor this is plain (job, config) order
    for row, job in enumerate(instance.jobs):
        found = False
        for p in procs:
            if p not in job.works or job.id not in ranges[p]:
                continue
            firsts, lasts = ranges[p][job.id]
            if firsts.size == 0:
                continue
            found = True
            bounds = np.array([float(t) for t in grids[p].boundaries])
            lengths = bounds[lasts + 1] - bounds[firsts]
            alpha = instance.processors.alpha(p)
            cost = float(job.works[p]) ** alpha / lengths ** (alpha - 1)
            parts.append((np.full(firsts.size, row), np.full(firsts.size, p), firsts, lasts, cost))
        if not found:
            raise InfeasibleError(f"job {job.id!r} has no configuration on any processor; "
                                  "increase epsilon or slot_cap")
    cat = [np.concatenate([part[k] for part in parts]) for k in range(5)]
    return ConfigLp(job_ids, cat[0].astype(np.int64), cat[1].astype(np.int64),
                    cat[2].astype(np.int64), cat[3].astype(np.int64), cat[4].astype(float),
                    keys, cap_offset, dict(grids))


def build_lp(instance: Instance, grids: Mapping[int, SlotGrid],
             configs: Mapping[int, Mapping[JobId, Sequence[Configuration]]]) -> ConfigLp:
    """Assemble the LP from per-processor grids and configuration lists."""
    ranges = {p: {jid: (np.array([c.first_slot for c in cs], dtype=np.int64),
                        np.array([c.last_slot for c in cs], dtype=np.int64))
                  for jid, cs in per_job.items()}
              for p, per_job in configs.items()}
    return _assemble(instance, grids, ranges)


def build_config_lp(instance: Instance, epsilon: Number,
                    slot_cap: Optional[int] = None) -> ConfigLp:
    """Grids and configurations for every processor, then the LP."""
    grids, ranges = {}, {}
    for p in instance.processors.ids:
        jobs = instance.jobs_on(p)
        if not jobs:
            continue
        grid = build_grid(instance, epsilon, slot_cap, processor=p)
        grids[p] = grid
        ranges[p] = {j.id: config_ranges(j, instance, grid) for j in jobs}
    return _assemble(instance, grids, ranges)


def solve_lp(lp: ConfigLp) -> LpSolution:
    res = simplex.solve_operator(lp.cost, lp.operator(), np.ones(lp.n_rows), lp.senses(),
                                 feas_tol=FEAS_TOL)
    if res.status != OPTIMAL:
        return LpSolution(lp, np.zeros(lp.n_variables), float("nan"), res.status, res.iterations)
    x = np.clip(res.x, 0.0, None)
    return LpSolution(lp, x, float(lp.cost @ x), OPTIMAL, res.iterations)


def check_solution(sol: LpSolution, tol: float = FEAS_TOL) -> List[str]:
    """Cover/capacity violations of a solution, as messages."""
    out = []
    for k, v in enumerate(sol.lp.cover @ sol.x):
        if v < 1 - tol:
            out.append(f"job {sol.lp.job_ids[k]!r} covered {v:.9g} < 1")
    for k, v in enumerate(sol.lp.capacity @ sol.x):
        if v > 1 + tol:
            p, t = sol.lp.capacity_keys[k]
            out.append(f"slot {t} of processor {p} loaded {v:.9g} > 1")
    if (sol.x < -tol).any():
        out.append("negative variable")
    return out


def dump_lp(lp: ConfigLp, out: TextIO):
    """Write the LP in CPLEX LP text format."""
    out.write("\\ configuration LP\nMinimize\n obj:")
    for k, c in enumerate(lp.cost):
        out.write(f" + {c!r} x{k}")
    out.write("\nSubject To\n")
    cover = lp.cover
    for row in range(len(lp.job_ids)):
        cols = cover.indices[cover.indptr[row]:cover.indptr[row + 1]]
        out.write(f" cover_{row}: " + " + ".join(f"x{k}" for k in cols) + " >= 1\n")
    cap = lp.capacity
    for row, (p, t) in enumerate(lp.capacity_keys):
        cols = cap.indices[cap.indptr[row]:cap.indptr[row + 1]]
        if len(cols):
            out.write(f" cap_{p}_{t}: " + " + ".join(f"x{k}" for k in cols) + " <= 1\n")
    out.write("End\n")
