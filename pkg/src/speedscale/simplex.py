"""Two-phase revised simplex for ``min c.x`` over ``<=``/``>=`` rows with ``x >= 0``.

The basis inverse is a dense matrix updated by rank-one pivots and
refactored periodically.  The constraint matrix is only touched through a
column operator (``rmatvec``, ``column``, ``submatrix``), so structured LPs
can price in time linear in the number of columns.  Entering columns are
picked by Dantzig's rule; after a run of degenerate pivots the solver
switches to Bland's rule until the objective moves again, which rules out
cycling.  Ties are broken by lowest index, so a given LP is always solved
along the same pivot path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

LE = 1
GE = -1


@dataclass
class SimplexResult:
    status: str
    x: Optional[np.ndarray]
    objective: float
    iterations: int


class SparseColumns:
    """Column operator over a scipy sparse matrix."""

    def __init__(self, A):
        self.A = sp.csc_matrix(A, dtype=float)
        self.A.sort_indices()
        self.At = self.A.T.tocsr()
        self.shape = self.A.shape

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        return self.At @ y

    def column(self, q: int) -> np.ndarray:
        a = np.zeros(self.shape[0])
        lo, hi = self.A.indptr[q], self.A.indptr[q + 1]
        a[self.A.indices[lo:hi]] = self.A.data[lo:hi]
        return a

    def submatrix(self, cols: Sequence[int]) -> np.ndarray:
        return self.A[:, cols].toarray()


class _Basis:
    """Basis over structural columns ``0..n-1`` followed by logical columns.

    Logical columns: one per row (slack ``+e_r`` for ``<=`` rows, surplus
    ``-e_r`` for ``>=`` rows), then one artificial ``+e_r`` per ``>=`` row.
    """

    def __init__(self, op, senses: np.ndarray, b: np.ndarray, refactor_every: int,
                 pivot_tol: float):
        self.op = op
        self.m, self.n = op.shape
        self.senses = senses
        self.ge_rows = np.flatnonzero(senses == GE)
        self.first_art = self.n + self.m
        self.total = self.first_art + len(self.ge_rows)
        self.b = b
        self.refactor_every = refactor_every
        self.pivot_tol = pivot_tol
        basis = np.empty(self.m, dtype=int)
        basis[senses == LE] = self.n + np.flatnonzero(senses == LE)
        basis[self.ge_rows] = self.first_art + np.arange(len(self.ge_rows))
        self.basis = basis
        self.is_basic = np.zeros(self.total, dtype=bool)
        self.is_basic[basis] = True
        self.refactor()

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        return np.concatenate([self.op.rmatvec(y), self.senses * y, y[self.ge_rows]])

    def column(self, q: int) -> np.ndarray:
        if q < self.n:
            return self.op.column(q)
        a = np.zeros(self.m)
        if q < self.first_art:
            a[q - self.n] = self.senses[q - self.n]
        else:
            a[self.ge_rows[q - self.first_art]] = 1.0
        return a

    def refactor(self):
        B = np.zeros((self.m, self.m))
        struct = np.flatnonzero(self.basis < self.n)
        if struct.size:
            B[:, struct] = self.op.submatrix(self.basis[struct])
        for r in np.flatnonzero(self.basis >= self.n):
            B[:, r] = self.column(int(self.basis[r]))
        self.B_inv = np.linalg.inv(B)
        self.xB = self.B_inv @ self.b
        self.xB[np.abs(self.xB) < 1e-12] = 0.0
        self.since_refactor = 0

    def pivot(self, r: int, q: int, u: np.ndarray):
        theta = self.xB[r] / u[r]
        piv = self.B_inv[r] / u[r]
        self.B_inv -= np.outer(u, piv)
        self.B_inv[r] = piv
        self.xB -= theta * u
        self.xB[r] = theta
        self.is_basic[self.basis[r]] = False
        self.is_basic[q] = True
        self.basis[r] = q
        self.since_refactor += 1
        if self.since_refactor >= self.refactor_every:
            self.refactor()

    def run(self, c: np.ndarray, allowed: np.ndarray, max_iter: int, degenerate_limit: int):
        """Minimise ``c`` from the current basis. Returns (status, iterations)."""
        d_tol = 1e-9 * max(1.0, float(np.max(np.abs(c))))
        bland = False
        degenerate = 0
        for it in range(max_iter):
            y = c[self.basis] @ self.B_inv
            d = c - self.rmatvec(y)
            idx = np.flatnonzero(allowed & ~self.is_basic & (d < -d_tol))
            if idx.size == 0:
                return OPTIMAL, it
            q = int(idx[0]) if bland else int(idx[np.argmin(d[idx])])
            u = self.B_inv @ self.column(q)
            rows = np.flatnonzero(u > self.pivot_tol)
            if rows.size == 0:
                return UNBOUNDED, it
            ratios = np.maximum(self.xB[rows], 0.0) / u[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12]
            r = int(tied[np.argmin(self.basis[tied])])
            self.pivot(r, q, u)
            if best <= 1e-12:
                degenerate += 1
                if degenerate >= degenerate_limit:
                    bland = True
            else:
                degenerate = 0
                bland = False
        return ITERATION_LIMIT, max_iter

    def dual_cleanup(self, c: np.ndarray, allowed: np.ndarray, max_iter: int, feas_tol: float):
        """Restore primal feasibility of a dual-feasible basis by dual simplex pivots."""
        for it in range(max_iter):
            r = int(np.argmin(self.xB))
            if self.xB[r] >= -feas_tol:
                return OPTIMAL, it
            alpha_r = self.rmatvec(self.B_inv[r])
            cand = np.flatnonzero(allowed & ~self.is_basic & (alpha_r < -self.pivot_tol))
            if cand.size == 0:
                return INFEASIBLE, it
            d = c - self.rmatvec(c[self.basis] @ self.B_inv)
            ratios = np.maximum(d[cand], 0.0) / -alpha_r[cand]
            q = int(cand[np.argmin(ratios)])
            self.pivot(r, q, self.B_inv @ self.column(q))
        return ITERATION_LIMIT, max_iter

    def drive_out_artificials(self):
        """Pivot zero-level artificials out of the basis where a replacement exists."""
        for r in range(self.m):
            if self.basis[r] < self.first_art:
                continue
            row = self.rmatvec(self.B_inv[r])
            row[self.first_art:] = 0.0
            row[self.is_basic] = 0.0
            cand = np.flatnonzero(np.abs(row) > 1e-9)
            if cand.size == 0:
                continue  # redundant row; its artificial stays basic at zero
            q = int(cand[0])
            self.xB[r] = 0.0
            self.pivot(r, q, self.B_inv @ self.column(q))


def solve_operator(c, op, b, senses, *, feas_tol: float = 1e-7, pivot_tol: float = 1e-9,
                   max_iter: Optional[int] = None, refactor_every: int = 64,
                   degenerate_limit: int = 30, perturbation: float = 1e-6) -> SimplexResult:
    """Minimise ``c @ x`` s.t. row ``r`` of ``op`` is ``<= b[r]`` (sense ``LE``) or
    ``>= b[r]`` (sense ``GE``), ``x >= 0``.  Requires ``b >= 0``.

    The right-hand side is perturbed by a fixed pseudo-random amount of
    relative size ``perturbation`` (relaxing each row) while pivoting, which breaks the heavy
    degeneracy of assignment-like LPs; the final basis is then re-evaluated
    on the true right-hand side and repaired with dual simplex pivots.
    """
    c = np.asarray(c, dtype=float)
    b = np.asarray(b, dtype=float)
    senses = np.asarray(senses, dtype=int)
    m, n = op.shape
    if c.size != n or b.size != m or senses.size != m:
        raise ValueError("dimension mismatch")
    if (b < 0).any():
        raise ValueError("right-hand sides must be nonnegative")
    if m == 0:
        if (c < 0).any():
            return SimplexResult(UNBOUNDED, None, float("-inf"), 0)
        return SimplexResult(OPTIMAL, np.zeros(n), 0.0, 0)
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000

    b_work = b
    if perturbation > 0:
        jitter = np.random.default_rng(0x5eed).uniform(0.5, 1.0, m)
        # relax every row (never tighten), so a feasible LP stays feasible
        shift = perturbation * np.maximum(b, 1.0) * jitter
        shift[(senses == GE) & (b <= shift)] = 0.0
        b_work = b + np.where(senses == LE, shift, -shift)
    tab = _Basis(op, senses, b_work, refactor_every, pivot_tol)
    allowed = np.ones(tab.total, dtype=bool)
    iters = 0
    if tab.total > tab.first_art:
        c1 = np.zeros(tab.total)
        c1[tab.first_art:] = 1.0
        status, it = tab.run(c1, allowed, max_iter, degenerate_limit)
        iters += it
        if status != OPTIMAL:
            return SimplexResult(status, None, float("nan"), iters)
        tab.refactor()
        if float(tab.xB[tab.basis >= tab.first_art].sum()) > feas_tol:
            return SimplexResult(INFEASIBLE, None, float("nan"), iters)
        tab.drive_out_artificials()

    allowed[tab.first_art:] = False
    c2 = np.zeros(tab.total)
    c2[:n] = c
    status, it = tab.run(c2, allowed, max_iter, degenerate_limit)
    iters += it
    if status != OPTIMAL:
        return SimplexResult(status, None, float("nan"), iters)
    tab.b = b
    tab.refactor()
    status, it = tab.dual_cleanup(c2, allowed, max_iter, feas_tol)
    iters += it
    if status != OPTIMAL:
        return SimplexResult(status, None, float("nan"), iters)
    tab.refactor()
    full = np.zeros(tab.total)
    full[tab.basis] = np.maximum(tab.xB, 0.0)
    x = full[:n]
    return SimplexResult(OPTIMAL, x, float(c @ x), iters)


def solve(c, A_ub=None, b_ub=None, A_ge=None, b_ge=None, **kwargs) -> SimplexResult:
    """Minimise ``c @ x`` subject to ``A_ub x <= b_ub``, ``A_ge x >= b_ge``, ``x >= 0``."""
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = sp.csc_matrix((0, n)) if A_ub is None else sp.csc_matrix(A_ub, dtype=float)
    A_ge = sp.csc_matrix((0, n)) if A_ge is None else sp.csc_matrix(A_ge, dtype=float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    b_ge = np.zeros(0) if b_ge is None else np.asarray(b_ge, dtype=float)
    op = SparseColumns(sp.vstack([A_ub, A_ge]))
    senses = np.concatenate([np.full(A_ub.shape[0], LE), np.full(A_ge.shape[0], GE)])
    return solve_operator(c, op, np.concatenate([b_ub, b_ge]), senses, **kwargs)
