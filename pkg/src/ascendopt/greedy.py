"""Scaled greedy solver for the integer version of the problem.

``greedy_pass`` repeatedly raises the coordinate with the cheapest unit
marginal cost by ``scale`` units (or by its saturation capacity when a full
step does not fit). ``gap_solve`` runs passes with halving scales, each
pass starting from the previous output minus one scale step, which is a
valid lower bound on the optimum. At scale 1 the output is optimal.

Feasibility uses the suffix form of the constraints: for every ``l``,
``sum_{e>=l} x(e) <= sum_{e>=l} alpha(e)``. Raising ``x(k)`` uses up slack in
every suffix starting at or before ``k``, so the capacity of ``k`` is the
smallest slack among those suffixes, capped by ``beta(k) - x(k)``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from ascendopt.errors import AscendError, InfeasibleError
from ascendopt.problem import Allocation, Instance, first_violation, make_allocation

GRID_TOL = 1e-9


def _integral(v: float, what: str) -> int:
    r = round(v)
    if abs(v - r) > GRID_TOL * max(1.0, abs(v)):
        raise ValueError(f"{what} must be integer-valued (got {v!r})")
    return int(r)


def integer_data(inst: Instance, unit: float = 1.0):
    """Integer demands and capacities of ``inst`` measured in ``unit`` steps."""
    alpha = [_integral(a / unit, f"alpha({e}) / {unit!r}") for e, a in enumerate(inst.alpha, 1)]
    beta = [int(math.floor(b / unit + GRID_TOL)) for b in inst.beta]
    return alpha, beta


class _Fenwick:
    def __init__(self, values):
        self.n = len(values)
        self.tree = [0] * (self.n + 1)
        for i, v in enumerate(values, 1):
            self.add(i, v)

    def add(self, i, v):
        while i <= self.n:
            self.tree[i] += v
            i += i & -i

    def prefix(self, i):
        s = 0
        while i > 0:
            s += self.tree[i]
            i -= i & -i
        return s


class SuffixSlack:
    """Incremental capacity oracle for the suffix constraints.

    A start ``l`` is a *record* when its slack is smaller than the slack of
    every start to its left; the smallest slack over ``l <= k`` is then the
    slack of the last record at or before ``k``. Raising a coordinate
    lowers the slack of all starts up to it by the same amount, so a start
    that stops being a record never becomes one again. Records are kept in
    a linked list and non-records are merged into their left neighbour with
    a path-compressed union-find, giving amortized near-constant lookups.
    Slack values themselves come from a Fenwick tree over ``x``.
    """

    def __init__(self, alpha: Sequence[int], x: Sequence[int]):
        n = len(alpha)
        self.n = n
        self.demand = [0] * (n + 2)
        for l in range(n, 0, -1):
            self.demand[l] = self.demand[l + 1] + alpha[l - 1]
        self.x = list(x)
        self.tree = _Fenwick(self.x)
        self.total = sum(self.x)
        self.parent = list(range(n + 1))
        self.next = [0] * (n + 1)
        self.comparisons = 0
        last, best = None, None
        for l in range(1, n + 1):
            s = self.slack(l)
            if s < 0:
                raise InfeasibleError(l, f"allocation exceeds the suffix demand starting at l={l}")
            if best is None or s < best:
                if last is not None:
                    self.next[last] = l
                last, best = l, s
            else:
                self.parent[l] = l - 1
        self.next[last] = 0

    def slack(self, l: int) -> int:
        return self.demand[l] - (self.total - self.tree.prefix(l - 1))

    def _find(self, k: int) -> int:
        root = k
        while self.parent[root] != root:
            self.comparisons += 1
            root = self.parent[root]
        while self.parent[k] != root:
            self.parent[k], k = root, self.parent[k]
        return root

    def capacity(self, k: int, cap: int) -> int:
        """Largest feasible increment of coordinate ``k`` (1-based)."""
        self.comparisons += 1
        return max(0, min(cap - self.x[k - 1], self.slack(self._find(k))))

    def raise_by(self, k: int, v: int) -> None:
        self.x[k - 1] += v
        self.tree.add(k, v)
        self.total += v
        r = self._find(k)
        s_r = self.slack(r)
        nxt = self.next[r]
        while nxt:
            self.comparisons += 1
            if self.slack(nxt) < s_r:
                break
            self.parent[nxt] = nxt - 1
            nxt = self.next[nxt]
        self.next[r] = nxt


def saturation_capacity(inst: Instance, x: Sequence[int], k: int) -> int:
    """Largest integer step that keeps ``x + step * e_k`` feasible.

    Direct O(n) evaluation: ``min(beta(k) - x(k), min_{l<=k} suffix slack(l))``.
    """
    alpha, beta = integer_data(inst)
    n = inst.n
    if not 1 <= k <= n:
        raise ValueError(f"coordinate {k} out of range")
    slack = []
    run_a = run_x = 0
    for l in range(n, 0, -1):
        run_a += alpha[l - 1]
        run_x += x[l - 1]
        slack.append(run_a - run_x)
    slack.reverse()
    for e in range(n):
        if x[e] < 0 or x[e] > beta[e] or slack[e] < 0:
            raise InfeasibleError(e + 1, f"partial allocation violates a constraint at {e + 1}")
    return min(beta[k - 1] - x[k - 1], min(slack[:k]))


@dataclass(frozen=True)
class PassRecord:
    scale: int
    lower: tuple
    x: tuple
    delta: tuple
    increments: int
    comparisons: int


def _marginal(value: Callable, e: int, v: int, cap: int) -> float:
    if v + 1 > cap:
        return math.inf
    return value(e, v + 1) - value(e, v)


def _pass(value, alpha, beta, scale, lower):
    n = len(alpha)
    for e, (lo, b) in enumerate(zip(lower, beta), 1):
        if lo < 0 or lo > b:
            raise AscendError(f"lower bound at {e} lies outside [0, beta]")
    slack = SuffixSlack(alpha, lower)
    remaining = sum(alpha) - sum(lower)
    delta = [0] * n
    heap = [(_marginal(value, e, lower[e], beta[e]), e) for e in range(n)]
    heapq.heapify(heap)
    steps = 0
    while remaining > 0 and heap:
        _, e = heapq.heappop(heap)
        k = e + 1
        cap = slack.capacity(k, beta[e])
        steps += 1
        if cap < 1:
            delta[e] = scale
            continue
        if cap < scale:
            slack.raise_by(k, cap)
            remaining -= cap
            delta[e] = cap
            continue
        slack.raise_by(k, scale)
        remaining -= scale
        delta[e] = scale
        heapq.heappush(heap, (_marginal(value, e, slack.x[e], beta[e]), e))
    return slack.x, delta, steps, slack.comparisons


def _value_fn(inst: Instance, unit: float):
    costs = inst.costs
    if unit == 1.0:
        return lambda e, v: costs[e].value(v)
    return lambda e, v: costs[e].value(min(v * unit, costs[e].domain_upper))


def greedy_pass(inst: Instance, scale: int, lower: Sequence[int]):
    """One greedy pass at the given scale; returns ``(x, delta)``."""
    alpha, beta = integer_data(inst)
    x, delta, _, _ = _pass(_value_fn(inst, 1.0), alpha, beta, int(scale), list(lower))
    return x, delta


@dataclass(frozen=True)
class GapRun:
    passes: tuple
    x: tuple

    @property
    def increments(self) -> int:
        return sum(p.increments for p in self.passes)


def initial_scale(total: int, n: int) -> int:
    return max(1, -(-total // (2 * n)))


def expected_passes(total: int, n: int) -> int:
    s0 = initial_scale(total, n)
    return (s0 - 1).bit_length() + 1


def _gap(inst: Instance, unit: float) -> GapRun:
    l = first_violation(inst)
    if l is not None:
        raise InfeasibleError(l)
    alpha, beta = integer_data(inst, unit)
    if any(sum(alpha[:i]) > sum(beta[:i]) for i in range(1, inst.n + 1)):
        raise AscendError("capacities rounded down to the grid no longer cover the demand")
    value = _value_fn(inst, unit)
    n = inst.n
    scale = initial_scale(sum(alpha), n)
    lower = [0] * n
    passes = []
    while True:
        x, delta, steps, comps = _pass(value, alpha, beta, scale, lower)
        passes.append(PassRecord(scale, tuple(lower), tuple(x), tuple(delta), steps, comps))
        if scale == 1:
            return GapRun(tuple(passes), tuple(x))
        lower = [max(lo, v - scale) for lo, v in zip(lower, x)]
        scale = -(-scale // 2)


def gap_run(inst: Instance) -> GapRun:
    """Full scaled-greedy run with one record per pass."""
    return _gap(inst, 1.0)


def gap_solve(inst: Instance) -> Allocation:
    """Integer optimum for integer demands."""
    return make_allocation(inst, gap_run(inst).x)


def gap_solve_eps(inst: Instance, eps: float) -> Allocation:
    """Grid solution with step ``eps``; demands must lie on the grid."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    try:
        run = _gap(inst, float(eps))
    except ValueError as exc:
        raise ValueError(f"{exc}; choose eps so that every alpha is a multiple of it") from None
    return make_allocation(inst, [v * eps for v in run.x])


def gap_run_eps(inst: Instance, eps: float) -> GapRun:
    return _gap(inst, float(eps))


__all__ = [
    "GapRun", "PassRecord", "SuffixSlack", "expected_passes", "gap_run", "gap_run_eps",
    "gap_solve", "gap_solve_eps", "greedy_pass", "initial_scale", "integer_data",
    "saturation_capacity",
]
