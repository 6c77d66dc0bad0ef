"""Divide-and-conquer solver over nested prefix upper bounds.

Reversing the index order turns the lower prefix bounds into upper prefix
bounds ``sum_{p<=s[i]} y(p) <= a_i`` with ``a_i = c(n) - c(n - s[i])``. The
bounds are first tightened against the capacities. The recursion then
solves the left and right halves of the block range independently and
merges them with one single-sum subproblem in which the left half may only
decrease and the right half may only increase.

The single-sum subproblem is solved by bisection on the marginal-cost level
followed by a lowest-index-first fill of any flat part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ascendopt._levels import suffix_levels
from ascendopt._numeric import csum
from ascendopt.costs import NEG_INF, CostBank
from ascendopt.errors import InvariantError
from ascendopt.problem import Allocation, Instance, make_allocation, require_feasible

SUM_TOL = 1e-9


@dataclass(frozen=True)
class NestedInstance:
    base: Instance
    breaks: tuple          # s[0] = 0 < s[1] < ... < s[m] = n, reversed index space
    bounds: tuple          # a_0 .. a_m
    tightened: tuple       # abar_0 .. abar_m
    alpha: tuple           # reversed demands
    beta: tuple            # reversed capacities
    costs: tuple           # reversed costs

    @property
    def m(self) -> int:
        return len(self.breaks) - 1

    @property
    def n(self) -> int:
        return self.base.n


def from_ascending(inst: Instance, breakpoints=None) -> NestedInstance:
    """Reverse ``inst`` into nested upper-bound form.

    ``breakpoints`` selects which original prefixes ``l`` (``1 <= l < n``)
    keep their constraint; the default keeps all of them. Dropping prefixes
    relaxes the problem.
    """
    require_feasible(inst)
    n = inst.n
    if breakpoints is None:
        kept = range(1, n)
    else:
        kept = sorted(set(int(l) for l in breakpoints))
        bad = [l for l in kept if not 1 <= l < n]
        if bad:
            raise ValueError(f"breakpoints must lie in 1..{n - 1}: {bad}")
    breaks = (0,) + tuple(sorted(n - l for l in kept)) + (n,)
    c = inst.prefix_demand()
    total = c[n]
    bounds = tuple(0.0 if p == 0 else total - c[n - p] for p in breaks)
    bounds = bounds[:-1] + (total,)
    return NestedInstance(
        base=inst,
        breaks=breaks,
        bounds=bounds,
        tightened=bounds,
        alpha=tuple(reversed(inst.alpha)),
        beta=tuple(reversed(inst.beta)),
        costs=tuple(reversed(inst.costs)),
    )


def tighten(ni: NestedInstance) -> NestedInstance:
    """One forward pass lowering each bound to what the capacities can reach."""
    a = ni.tightened
    m = ni.m
    out = [0.0]
    for i in range(1, m):
        block = csum(ni.beta[ni.breaks[i - 1]:ni.breaks[i]])
        out.append(min(out[-1] + block, a[i]))
    out.append(a[m])
    return NestedInstance(ni.base, ni.breaks, ni.bounds, tuple(out), ni.alpha, ni.beta, ni.costs)


@dataclass(frozen=True)
class RapSolution:
    x: np.ndarray
    eta: float


def rap_solve(costs, lower, upper, target: float, tol: float = SUM_TOL) -> RapSolution:
    """Minimize the summed cost with box bounds and one equality on the sum."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(lower > upper):
        raise ValueError("lower bound exceeds upper bound")
    lo_sum, up_sum = csum(lower), csum(upper)
    slack = tol * (1.0 + abs(target))
    if target < lo_sum - slack or target > up_sum + slack:
        raise ValueError(f"target {target!r} outside [{lo_sum!r}, {up_sum!r}]")
    if target <= lo_sum:
        return RapSolution(lower.copy(), NEG_INF)
    bank = CostBank(costs)
    lo, hi = suffix_levels(bank, upper, np.array([target]), np.array([0]), floor=lower)
    base = bank.h(lo[0], upper, False, lower)
    top = bank.h(hi[0], upper, True, lower)
    extra = target - csum(base)
    x = base.copy()
    for e in range(len(x)):
        if extra <= 0:
            break
        step = min(top[e] - x[e], extra)
        if step > 0:
            x[e] += step
            extra -= step
    return RapSolution(x, float(hi[0]))


@dataclass
class NestedStats:
    calls_by_depth: dict = field(default_factory=dict)
    merges: list = field(default_factory=list)

    @property
    def rap_calls(self) -> int:
        return sum(self.calls_by_depth.values())

    @property
    def depth(self) -> int:
        return max(self.calls_by_depth) if self.calls_by_depth else 0


@dataclass(frozen=True)
class MergeRecord:
    v: int
    w: int
    left_excess: float   # max over the left half of x*(e) - x_down(e)
    right_deficit: float  # max over the right half of x_up(e) - x*(e)


def _recurse(ni, v, w, depth, y, stats, tol):
    s, abar = ni.breaks, ni.tightened
    lo_e, hi_e = s[v - 1], s[w]
    stats.calls_by_depth[depth] = stats.calls_by_depth.get(depth, 0) + 1
    target = abar[w] - abar[v - 1]
    beta = np.array(ni.beta[lo_e:hi_e])
    if v == w:
        lower, upper = np.zeros(hi_e - lo_e), beta
    else:
        t = (v + w) // 2
        _recurse(ni, v, t, depth + 1, y, stats, tol)
        _recurse(ni, t + 1, w, depth + 1, y, stats, tol)
        mid = s[t] - lo_e
        lower = np.concatenate([np.zeros(mid), y[s[t]:hi_e]])
        upper = np.concatenate([y[lo_e:s[t]], beta[mid:]])
    try:
        sol = rap_solve(ni.costs[lo_e:hi_e], lower, upper, target, tol)
    except ValueError as exc:
        raise InvariantError(f"subproblem on blocks {v}..{w} is infeasible: {exc}") from None
    if v != w:
        stats.merges.append(MergeRecord(
            v, w,
            float(np.max(sol.x[:mid] - upper[:mid], initial=0.0)),
            float(np.max(lower[mid:] - sol.x[mid:], initial=0.0)),
        ))
    y[lo_e:hi_e] = sol.x


def nested_run(ni: NestedInstance, tol: float = SUM_TOL):
    """Solve and return ``(allocation, stats)``; depth 1 is the root call."""
    stats = NestedStats()
    y = np.zeros(ni.n)
    _recurse(ni, 1, ni.m, 1, y, stats, tol)
    x = y[::-1].tolist()
    return make_allocation(ni.base, x), stats


def nested_solve(ni: NestedInstance, tol: float = SUM_TOL) -> Allocation:
    return nested_run(ni, tol)[0]


def solve(inst: Instance, breakpoints=None, tol: float = SUM_TOL) -> Allocation:
    """Reverse, tighten and solve ``inst``."""
    return nested_solve(tighten(from_ascending(inst, breakpoints)), tol)


def expected_depth(m: int) -> int:
    return 1 + math.ceil(math.log2(m)) if m > 1 else 1


__all__ = [
    "MergeRecord", "NestedInstance", "NestedStats", "RapSolution", "expected_depth",
    "from_ascending", "nested_run", "nested_solve", "rap_solve", "solve", "tighten",
]
