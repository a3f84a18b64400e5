"""Approximation-ratio formulas and seeded experiment batteries.

Every preset returns a list of flat dict rows suitable for CSV output.
Cells are independent and can run in a process pool.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence

from .instances import generate
from .model import Instance, MULTI, ParameterError
from .multi import PIPELINE, solve_multi
from .oracle import bell_tilde
from .single import solve_single
from .yds import yds_schedule

PRESETS = ("table1", "ratio-sweep", "bell")


def _b(alpha: float) -> float:
    return bell_tilde(alpha, 1e-12).value


def single_bounds(alpha: float, eps: float) -> Dict[str, float]:
    """The three single-processor ratios in circulation for this algorithm."""
    b = _b(alpha)
    return {
        "single_eps_pow_alpha": (1 + eps) ** alpha * b,
        "single_eps_pow_1": (1 + eps) * b,
        "single_eps_pow_alpha_minus_1": (1 + eps) ** (alpha - 1) * b,
    }


def multi_bound(alpha: float, eps: float, wratio: float) -> float:
    return _b(alpha) * ((1 + eps) * (1 + wratio)) ** alpha


def equal_work_bound(alpha: float, eps: float) -> float:
    return _b(alpha) * (2 * (1 + eps)) ** alpha


def table1_formulas(alpha: float, eps: float, wratio: float) -> Dict[str, float]:
    """Every cell of the comparison table, evaluated numerically."""
    b = _b(alpha)
    return {
        "single_previous_lp": 2 ** (alpha - 1) * (1 + eps) ** alpha * b,
        "single_previous_combinatorial": (12 * (1 + eps)) ** (alpha - 1),
        "single_ours": (1 + eps) ** alpha * b,
        "homogeneous_previous": 2.5 ** (alpha - 1) * b * ((1 + eps) * (1 + wratio)) ** alpha,
        "homogeneous_works_previous": 2.5 ** (alpha - 1) * b * ((1 + eps) * (1 + wratio) * wratio) ** alpha,
        "heterogeneous_ours": multi_bound(alpha, eps, wratio),
    }


def equal_work_per_processor(instance: Instance) -> bool:
    """True if on every processor all eligible jobs have the same work."""
    for p in instance.processors.ids:
        works = {j.works[p] for j in instance.jobs_on(p)}
        if len(works) > 1:
            return False
    return True


def bound_report(instance: Instance, epsilon: float) -> Dict[str, float]:
    alpha = instance.processors.alpha_max
    wratio = float(instance.w_max / instance.w_min)
    if instance.mode != MULTI:
        return single_bounds(alpha, epsilon)
    out = {"multi": multi_bound(alpha, epsilon, wratio)}
    if equal_work_per_processor(instance):
        out["equal_work"] = equal_work_bound(alpha, epsilon)
    return out


def _cell(args) -> Dict[str, object]:
    env, kind, n, m, seed, alpha, eps, max_work, trials, slot_cap = args
    inst = generate(kind, n, m, seed, alpha=alpha, max_work=max_work)
    if env == "single":
        res = solve_single(inst, eps, seed=seed, trials=trials, slot_cap=slot_cap)
        lower = yds_schedule(inst).energy
    else:
        res = solve_multi(inst, eps, seed=seed, trials=trials, slot_cap=slot_cap, backend=PIPELINE)
        lower = None
    return {"environment": env, "kind": kind, "n": n, "m": m, "seed": seed, "alpha": alpha,
            "epsilon": eps, "wratio": float(inst.w_max / inst.w_min), "lp_objective": res.lp_objective,
            "energy": res.energy, "ratio": res.ratio,
            "yds_energy": "" if lower is None else lower}


def _run(cells: Sequence[tuple], jobs: int) -> List[Dict[str, object]]:
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_cell, cells))
    return [_cell(c) for c in cells]


def table1(alphas: Iterable[float] = (2.0, 3.0), epsilons: Iterable[float] = (1.0, 0.5),
           wratios: Iterable[int] = (1, 2), count: int = 5, n: int = 5, m: int = 2,
           seed: int = 0, trials: int = 8, slot_cap: Optional[int] = 10,
           jobs: int = 1) -> List[Dict[str, object]]:
    """One row per ``(alpha, epsilon, w_max/w_min)`` grid point.

    Formula columns are the table cells; the empirical columns summarise a
    battery of ``count`` seeded single- and multi-processor instances whose
    works lie in ``1..w_max/w_min`` (equal work per processor when it is 1).
    """
    grid = [(float(a), float(e), int(w)) for a in alphas for e in epsilons for w in wratios]
    cells = []
    for a, e, w in grid:
        kind = "equal-work" if w == 1 else "random"
        for k in range(count):
            cells.append(("single", kind, n, 1, seed + k, a, e, w, trials, slot_cap))
            cells.append(("multi", kind, n, m, seed + k, a, e, w, trials, slot_cap))
    results = _run(cells, jobs)
    groups: Dict[tuple, List[float]] = {}
    for c, r in zip(cells, results):
        groups.setdefault((c[0], c[5], c[6], c[7]), []).append(r["ratio"])
    rows = []
    for a, e, w in grid:
        row: Dict[str, object] = {"alpha": a, "epsilon": e, "wratio": w}
        row.update(table1_formulas(a, e, w))
        for env in ("single", "multi"):
            rs = groups.get((env, a, e, w), [])
            row[f"{env}_ratio_mean"] = sum(rs) / len(rs) if rs else ""
            row[f"{env}_ratio_max"] = max(rs) if rs else ""
            row[f"{env}_runs"] = len(rs)
        rows.append(row)
    return rows


def ratio_sweep(alphas: Iterable[float] = (1.5, 2.0, 2.5, 3.0), epsilons: Iterable[float] = (1.0, 0.5),
                count: int = 5, n: int = 5, m: int = 1, kind: str = "random", seed: int = 0,
                trials: int = 8, slot_cap: Optional[int] = 10, jobs: int = 1) -> List[Dict[str, object]]:
    """One row per (alpha, epsilon, instance) with the empirical ratio and the bound it is held to."""
    env = "single" if m == 1 else "multi"
    cells = [(env, kind, n, m, seed + k, float(a), float(e), 5, trials, slot_cap)
             for a in alphas for e in epsilons for k in range(count)]
    rows = _run(cells, jobs)
    for r in rows:
        a, e = r["alpha"], r["epsilon"]
        r["bound"] = ((1 + e) ** a * _b(a) if env == "single" else multi_bound(a, e, r["wratio"]))
    return rows


def bell_rows(alphas: Optional[Iterable[float]] = None, tol: float = 1e-8) -> List[Dict[str, object]]:
    if alphas is None:
        alphas = [1 + 0.25 * k for k in range(13)]
    out = []
    for a in alphas:
        bt = bell_tilde(float(a), tol)
        out.append({"alpha": bt.alpha, "value": bt.value, "terms_used": bt.terms_used,
                    "truncation_bound": bt.truncation_bound})
    return out


def run_preset(preset: str, **params) -> List[Dict[str, object]]:
    if preset == "table1":
        return table1(**params)
    if preset == "ratio-sweep":
        return ratio_sweep(**params)
    if preset == "bell":
        return bell_rows(**params)
    raise ParameterError(f"unknown preset {preset!r}; expected one of {PRESETS}")


def to_csv(rows: List[Dict[str, object]]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    fields = list(rows[0].keys())
    for r in rows[1:]:
        fields.extend(k for k in r if k not in fields)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _fmt(v) for k, v in r.items()})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return v
