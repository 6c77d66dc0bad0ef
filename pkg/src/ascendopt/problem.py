"""Problem instances, feasibility, and the polymatroid view used for certification.

An instance asks for ``x`` minimizing ``sum_e w_e(x(e))`` subject to
``0 <= x(e) <= beta(e)``, ``sum_{e<=l} x(e) >= sum_{e<=l} alpha(e)`` for
``l < n`` and equality at ``l = n``. Indices in public reports are 1-based,
matching the usual statement of the ascending constraints.

Subsets of the ground set are bitmasks: bit ``e - 1`` stands for element
``e``. Everything that enumerates subsets is gated to ``n <= 20``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from ascendopt._numeric import csum, cumsum
from ascendopt.costs import ConvexCost, POS_INF
from ascendopt.errors import CapabilityError, InfeasibleError

ORACLE_MAX_N = 20
TIGHT_TOL = 1e-9
CERT_TOL = 1e-7


@dataclass(frozen=True)
class Instance:
    alpha: tuple
    beta: tuple
    costs: tuple

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        beta = tuple(float(b) for b in self.beta)
        costs = tuple(self.costs)
        if not (len(alpha) == len(beta) == len(costs)):
            raise ValueError("alpha, beta and costs must have equal length")
        if not alpha:
            raise ValueError("instance needs at least one coordinate")
        for e, (a, b, c) in enumerate(zip(alpha, beta, costs), start=1):
            if not isinstance(c, ConvexCost):
                raise TypeError(f"costs[{e - 1}] is not a ConvexCost")
            if not (math.isfinite(a) and a >= 0):
                raise ValueError(f"alpha({e}) must be finite and nonnegative")
            if not (math.isfinite(b) and b > 0):
                raise ValueError(f"beta({e}) must be finite and positive")
            if b > c.domain_upper:
                raise ValueError(f"beta({e}) exceeds the cost domain")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "costs", costs)

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def total(self) -> float:
        """Total demand ``c(n)``."""
        return csum(self.alpha)

    def prefix_demand(self) -> list[float]:
        """``c(0), c(1), ..., c(n)``."""
        return cumsum(self.alpha)

    def objective(self, x: Sequence[float]) -> float:
        return csum(c.value(max(float(v), 0.0)) for c, v in zip(self.costs, x))


@dataclass(frozen=True)
class Allocation:
    x: tuple
    objective: float

    def __len__(self):
        return len(self.x)

    def __getitem__(self, i):
        return self.x[i]


def make_allocation(inst: Instance, x: Iterable) -> Allocation:
    xs = tuple(x)
    return Allocation(xs, inst.objective(xs))


# -- feasibility ---------------------------------------------------------------

def first_violation(inst: Instance) -> int | None:
    """First prefix ``l`` (1-based) with ``c(l) > sum_{e<=l} beta(e)``."""
    ca = cumsum(inst.alpha)
    cb = cumsum(inst.beta)
    for l in range(1, inst.n + 1):
        if ca[l] > cb[l]:
            return l
    return None


def is_feasible(inst: Instance) -> bool:
    return first_violation(inst) is None


def require_feasible(inst: Instance) -> None:
    l = first_violation(inst)
    if l is not None:
        raise InfeasibleError(l)


def construct_feasible_point(inst: Instance) -> Allocation:
    """Fill ``beta`` from the left until the total demand is met."""
    require_feasible(inst)
    total = cumsum(inst.alpha)[inst.n]
    cb = cumsum(inst.beta)
    x = [0.0] * inst.n
    for l in range(1, inst.n + 1):
        if cb[l] >= total:
            x[: l - 1] = inst.beta[: l - 1]
            x[l - 1] = min(max(total - cb[l - 1], 0.0), inst.beta[l - 1])
            # Nudge the last entry by ulps so the running sum hits the total.
            for _ in range(16):
                got = cumsum(x)[inst.n]
                if got == total:
                    break
                step = math.nextafter(x[l - 1], math.inf if got < total else -math.inf)
                x[l - 1] = min(max(step, 0.0), inst.beta[l - 1])
            break
    return make_allocation(inst, x)


@dataclass(frozen=True)
class ConstraintReport:
    box_violation: float
    box_index: int | None
    prefix_violation: float
    prefix_index: int | None
    equality_violation: float
    tol: float

    @property
    def satisfied(self) -> bool:
        return max(self.box_violation, self.prefix_violation, self.equality_violation) <= self.tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d["satisfied"] = self.satisfied
        return d


def check_constraints(inst: Instance, x: Sequence[float], tol: float = 0.0) -> ConstraintReport:
    if len(x) != inst.n:
        raise ValueError("allocation length does not match the instance")
    xs = [float(v) for v in x]
    box, box_at = 0.0, None
    for e, (v, b) in enumerate(zip(xs, inst.beta), start=1):
        worst = max(-v, v - b)
        if worst > box:
            box, box_at = worst, e
    ca = cumsum(inst.alpha)
    cx = cumsum(xs)
    pre, pre_at = 0.0, None
    for l in range(1, inst.n):
        gap = ca[l] - cx[l]
        if gap > pre:
            pre, pre_at = gap, l
    eq = abs(cx[inst.n] - ca[inst.n])
    return ConstraintReport(box, box_at, pre, pre_at, eq, tol)


# -- polymatroid view ----------------------------------------------------------

def mask(*elements: int) -> int:
    """Bitmask for the given 1-based elements."""
    m = 0
    for e in elements:
        m |= 1 << (e - 1)
    return m


def members(m: int) -> list[int]:
    """1-based elements of a bitmask, ascending."""
    out = []
    e = 1
    while m:
        if m & 1:
            out.append(e)
        m >>= 1
        e += 1
    return out


def _gate(inst: Instance) -> None:
    if inst.n > ORACLE_MAX_N:
        raise CapabilityError(
            f"subset enumeration is limited to n <= {ORACLE_MAX_N} (got n={inst.n})"
        )


def _zeta(inst: Instance, s: int, c: list[float]) -> float:
    best = 0.0
    for j in range(1, inst.n + 1):
        if not (s >> (j - 1)) & 1:
            break
        best = c[j]
    return best


def rank(inst: Instance, a: int) -> float:
    """``f(A) = c(n) - zeta(E - A)``."""
    _gate(inst)
    full = (1 << inst.n) - 1
    c = inst.prefix_demand()
    return c[inst.n] - _zeta(inst, full & ~a, c)


def rank_beta(inst: Instance, a: int) -> float:
    """``f_beta(A) = min_{D subset A} f(D) + beta(A - D)`` by enumeration."""
    _gate(inst)
    full = (1 << inst.n) - 1
    c = inst.prefix_demand()
    best = POS_INF
    d = a
    while True:
        rest = a & ~d
        val = c[inst.n] - _zeta(inst, full & ~d, c) + csum(inst.beta[e - 1] for e in members(rest))
        best = min(best, val)
        if d == 0:
            break
        d = (d - 1) & a
    return best


def rank_table(inst: Instance, use_beta: bool) -> list[float]:
    """Rank of every subset, indexed by bitmask.

    Uses the closed form: ``f(A)`` only depends on the smallest element ``k``
    of ``A`` (``f(A) = c(n) - c(k-1)``), so the best ``D`` for ``f_beta`` is
    either empty or the part of ``A`` from some ``k`` onwards.
    """
    _gate(inst)
    n = inst.n
    c = inst.prefix_demand()
    table = [0.0] * (1 << n)
    for a in range(1, 1 << n):
        elems = members(a)
        f_a = c[n] - c[elems[0] - 1]
        if not use_beta:
            table[a] = f_a
            continue
        best = csum(inst.beta[e - 1] for e in elems)
        below = 0.0
        for e in elems:
            best = min(best, c[n] - c[e - 1] + below)
            below += inst.beta[e - 1]
        table[a] = best
    return table


def _subset_sums(x: Sequence[float]) -> list[float]:
    n = len(x)
    sums = [0.0] * (1 << n)
    for a in range(1, 1 << n):
        low = a & -a
        sums[a] = sums[a ^ low] + x[low.bit_length() - 1]
    return sums


def _check_independent(table, sums, tol):
    for a, (g, s) in enumerate(zip(table, sums)):
        if s > g + tol:
            raise ValueError(f"allocation is not independent: x(A) > rank(A) for A={members(a)}")


def dep_set(inst: Instance, x: Sequence[float], e: int, use_beta: bool = True,
            tol: float = TIGHT_TOL) -> int:
    """Smallest tight set containing element ``e`` (1-based) as a bitmask."""
    _gate(inst)
    table = rank_table(inst, use_beta)
    sums = _subset_sums([float(v) for v in x])
    _check_independent(table, sums, tol)
    return _dep(table, sums, e, inst.n, tol)


def _dep(table, sums, e, n, tol):
    bit = 1 << (e - 1)
    dep = (1 << n) - 1
    for a in range(1, 1 << n):
        if a & bit and sums[a] >= table[a] - tol:
            dep &= a
    return dep


@dataclass(frozen=True)
class CertificateReport:
    passed: bool
    pairs_checked: int
    worst_pair: tuple | None
    worst_gap: float
    tol: float

    def to_dict(self) -> dict:
        return asdict(self)


def groenevelt_certificate(inst: Instance, x: Sequence[float], tol: float = CERT_TOL,
                           tight_tol: float = TIGHT_TOL) -> CertificateReport:
    """Exchange-pair optimality test for a base of ``(E, f_beta)``.

    For every exchangeable pair ``(u, e)`` (``u`` in the dependence set of
    ``e``) the right derivative at ``e`` must dominate the left derivative
    at ``u``. ``worst_gap`` is the largest ``w_u^-(x_u) - w_e^+(x_e)`` seen;
    the certificate passes when it is at most ``tol``.
    """
    _gate(inst)
    n = inst.n
    xs = [float(v) for v in x]
    table = rank_table(inst, True)
    sums = _subset_sums(xs)
    _check_independent(table, sums, tol)
    full = (1 << n) - 1
    if abs(sums[full] - table[full]) > tol:
        raise ValueError("allocation is not a base: x(E) != f_beta(E)")

    def right(e):
        c, v = inst.costs[e - 1], max(xs[e - 1], 0.0)
        return POS_INF if v >= c.domain_upper else c.right_derivative(v)

    def left(u):
        c, v = inst.costs[u - 1], xs[u - 1]
        return c.left_derivative(min(v, c.domain_upper)) if v > 0 else -POS_INF

    worst_gap, worst_pair, checked = -POS_INF, None, 0
    for e in range(1, n + 1):
        dep = _dep(table, sums, e, n, tight_tol)
        lhs = None
        for u in members(dep & ~(1 << (e - 1))):
            if lhs is None:
                lhs = right(e)
            gap = left(u) - lhs
            checked += 1
            if gap > worst_gap:
                worst_gap, worst_pair = gap, (u, e)
    passed = worst_gap <= tol
    return CertificateReport(passed, checked, worst_pair, worst_gap if checked else 0.0, tol)
