"""Brute-force reference solvers for small instances.

These exist to produce ground truth for the real solvers and are guarded by
size limits. Nothing here is meant to be fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ascendopt.errors import CapabilityError, InfeasibleError
from ascendopt.greedy import integer_data
from ascendopt.problem import (
    Allocation,
    Instance,
    check_constraints,
    construct_feasible_point,
    first_violation,
    make_allocation,
)
from ascendopt.tautstring import ConcaveCover, CoverPoint

SIZE_GUARD = 10**7
POLISH_MIN_STEP = 1e-9
FEAS_TOL = 1e-12


@dataclass(frozen=True)
class BruteForceConfig:
    max_n: int = 4
    max_B: int = 12
    grid_step: float = 0.05


def _require_feasible(inst):
    l = first_violation(inst)
    if l is not None:
        raise InfeasibleError(l)


def enumerate_integer_optimum(inst: Instance, cfg: BruteForceConfig = BruteForceConfig()) -> Allocation:
    """Best integer point of the feasible set; ties go to the lexicographically smallest."""
    _require_feasible(inst)
    alpha, beta = integer_data(inst)
    n, total = inst.n, sum(alpha)
    if n > cfg.max_n or total > cfg.max_B or (total + 1) ** n > SIZE_GUARD:
        raise CapabilityError(
            f"integer enumeration limited to n <= {cfg.max_n}, B <= {cfg.max_B} "
            f"(got n={n}, B={total})"
        )
    need = [0] * (n + 1)
    for k in range(1, n + 1):
        need[k] = need[k - 1] + alpha[k - 1]
    room_after = [0] * (n + 1)
    for k in range(n - 1, -1, -1):
        room_after[k] = room_after[k + 1] + beta[k]
    best = [math.inf, None]
    x = [0] * n

    def walk(k, prefix):
        if k == n - 1:
            last = total - prefix
            if 0 <= last <= beta[k]:
                x[k] = last
                val = inst.objective(x)
                if val < best[0]:
                    best[0], best[1] = val, tuple(x)
            return
        for v in range(0, beta[k] + 1):
            p = prefix + v
            if p > total:
                break
            if p < need[k + 1] or total - p > room_after[k + 1]:
                continue
            x[k] = v
            walk(k + 1, p)

    walk(0, 0)
    if best[1] is None:
        raise InfeasibleError(n, "no integer point satisfies the constraints")
    return Allocation(best[1], best[0])


def _feasible(inst, x):
    return check_constraints(inst, x, FEAS_TOL).satisfied


def grid_refine_optimum(inst: Instance, cfg: BruteForceConfig = BruteForceConfig(),
                        polish: bool = True) -> Allocation:
    """Grid search at ``cfg.grid_step`` followed by pairwise mass exchanges.

    The exchange phase moves ``step`` units from one coordinate to another
    whenever that stays feasible and lowers the objective, halving ``step``
    down to 1e-9 once no move helps.
    """
    _require_feasible(inst)
    n, h = inst.n, float(cfg.grid_step)
    total = inst.total
    if n > cfg.max_n or (total / h + 1) ** n > SIZE_GUARD:
        raise CapabilityError(
            f"grid search limited to n <= {cfg.max_n} and (B/step + 1)^n <= {SIZE_GUARD}"
        )
    c = inst.prefix_demand()
    levels = []
    for b in inst.beta:
        vals = [k * h for k in range(int(math.floor(b / h + 1e-9)) + 1) if k * h <= b]
        if vals[-1] < b:
            vals.append(b)
        levels.append(vals)
    room_after = [0.0] * (n + 1)
    for k in range(n - 1, -1, -1):
        room_after[k] = room_after[k + 1] + inst.beta[k]
    best = [math.inf, None]
    x = [0.0] * n

    def walk(k, prefix):
        if k == n - 1:
            last = total - prefix
            if -FEAS_TOL <= last <= inst.beta[k] + FEAS_TOL:
                x[k] = min(max(last, 0.0), inst.beta[k])
                val = inst.objective(x)
                if val < best[0]:
                    best[0], best[1] = val, list(x)
            return
        for v in levels[k]:
            p = prefix + v
            if p > total + FEAS_TOL:
                break
            if p < c[k + 1] - FEAS_TOL or total - p > room_after[k + 1] + FEAS_TOL:
                continue
            x[k] = v
            walk(k + 1, p)

    walk(0, 0.0)
    start = best[1] if best[1] is not None else list(construct_feasible_point(inst).x)
    if polish:
        start = _exchange_polish(inst, start, h)
    return make_allocation(inst, start)


def _exchange_polish(inst, x, step):
    x = list(x)
    val = inst.objective(x)
    n = inst.n
    while step >= POLISH_MIN_STEP:
        improved = True
        while improved:
            improved = False
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    move = min(step, x[i])
                    if move <= 0:
                        continue
                    y = list(x)
                    y[i] -= move
                    y[j] += move
                    if y[j] > inst.beta[j] or not _feasible(inst, y):
                        continue
                    new = inst.objective(y)
                    if new < val:
                        x, val, improved = y, new, True
        step /= 2
    return x


def reference_majorant(points: Sequence[CoverPoint]) -> ConcaveCover:
    """Quadratic-time majorant: keep ``i`` iff every chord around it passes strictly below."""
    n = len(points) - 1
    D = [Fraction(p.D) for p in points]
    E = [Fraction(p.E) for p in points]

    def slope(a, b):
        return (E[b] - E[a]) / (D[b] - D[a])

    kept = [0]
    for i in range(1, n):
        left = min(slope(a, i) for a in range(i))
        right = max(slope(i, b) for b in range(i + 1, n + 1))
        if left > right:
            kept.append(i)
    kept.append(n)
    ln = [None] * (n + 1)
    rn = [None] * (n + 1)
    for a, b in zip(kept, kept[1:]):
        rn[a], ln[b] = b, a
    return ConcaveCover(tuple(kept), tuple(ln), tuple(rn), 0)
