"""Seeded random instance builders shared by the test modules."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from ascendopt.costs import DSeparable, PhiKind, PiecewiseLinear, PowerP, Quadratic
from ascendopt.problem import Instance, is_feasible


def integer_pwl(rng: random.Random, max_segments: int = 4) -> PiecewiseLinear:
    pts = [(0, rng.randint(-3, 3))]
    for _ in range(rng.randint(0, max_segments - 1)):
        pts.append((pts[-1][0] + rng.randint(1, 3), pts[-1][1] + rng.randint(0, 3)))
    return PiecewiseLinear(pts)


def integer_cost(rng: random.Random):
    """A cost whose values at integers are exact small integers."""
    k = rng.random()
    if k < 0.4:
        return Quadratic(rng.randint(1, 3), rng.randint(-3, 3))
    if k < 0.6:
        return PowerP(rng.randint(1, 3), rng.choice((2, 3)))
    return integer_pwl(rng)


def smooth_cost(rng: random.Random):
    k = rng.random()
    if k < 0.45:
        return Quadratic(rng.uniform(0.5, 3.0), rng.uniform(-2.0, 2.0))
    if k < 0.75:
        return PowerP(rng.uniform(0.5, 2.0), rng.choice((1.5, 2.0, 2.5, 3.0)))
    return DSeparable(rng.uniform(0.5, 2.0), rng.choice((PhiKind.SQUARE, PhiKind.HYPOT)))


def any_cost(rng: random.Random):
    return smooth_cost(rng) if rng.random() < 0.6 else integer_pwl(rng)


def integer_instance(rng: random.Random, max_n: int = 4, max_total: int = 12) -> Instance:
    """Feasible instance with integer demands and capacities."""
    while True:
        n = rng.randint(1, max_n)
        total = rng.randint(0, max_total)
        alpha = [0] * n
        for _ in range(total):
            alpha[rng.randrange(n)] += 1
        beta = [rng.randint(1, 8) for _ in range(n)]
        inst = Instance(alpha, beta, [integer_cost(rng) for _ in range(n)])
        if is_feasible(inst):
            return inst


def continuous_instance(rng: random.Random, n: int, cost=smooth_cost, grid: float = 0.0) -> Instance:
    """Feasible instance; ``grid > 0`` puts demands on multiples of ``grid``."""
    while True:
        if grid:
            alpha = [round(rng.uniform(0, 3) / grid) * grid for _ in range(n)]
        else:
            alpha = [rng.choice((0.0, rng.uniform(0, 3))) for _ in range(n)]
        beta = [rng.uniform(0.3, 4.0) for _ in range(n)]
        inst = Instance(alpha, beta, [cost(rng) for _ in range(n)])
        if is_feasible(inst):
            return inst


def dsep_instance(rng: random.Random, n: int, phi=PhiKind.SQUARE) -> tuple[Instance, list, list]:
    d = [rng.uniform(0.2, 3.0) for _ in range(n)]
    alpha = [rng.choice((0.0, rng.uniform(0, 3))) for _ in range(n)]
    cap = max(sum(alpha), 1.0)
    return dsep_from(d, alpha, phi, cap), d, alpha


def dsep_from(d, alpha, phi, cap=None) -> Instance:
    cap = cap if cap is not None else max(sum(alpha), 1.0)
    return Instance(alpha, [cap] * len(d), [DSeparable(v, phi) for v in d])


@st.composite
def small_instances(draw, max_n: int = 6, smooth: bool = False):
    """Hypothesis strategy for feasible small instances."""
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(1, max_n))
    rng = random.Random(seed)
    return continuous_instance(rng, n, smooth_cost if smooth else any_cost)


def decomp_violations(inst: Instance, trace, tol: float = 1e-8) -> list[str]:
    """Chain, suffix-equality and band checks on a decomposition trace."""
    from ascendopt._numeric import csum

    out = []
    recs = trace.records
    x = trace.allocation.x
    for a, b in zip(recs, recs[1:]):
        if not b.gamma_j > a.gamma_j:
            out.append(f"gamma not increasing at j={b.j}: {a.gamma_j} -> {b.gamma_j}")
        if not b.s_j < a.s_j:
            out.append(f"s not decreasing at j={b.j}")
    if not recs or recs[-1].s_j != 1:
        out.append("trace does not end at s=1")
    top = inst.n + 1
    for r in recs:
        if r.s_j not in r.tied:
            out.append(f"s={r.s_j} not among tied indices at j={r.j}")
        gap = csum(x[r.s_j - 1:]) - csum(inst.alpha[r.s_j - 1:])
        if abs(gap) > tol * (1 + inst.total):
            out.append(f"suffix equality off by {gap} at s={r.s_j}")
        for e in range(r.s_j, top):
            c, b = inst.costs[e - 1], inst.beta[e - 1]
            lo, hi = c.h_minus(b, r.gamma_lo), c.h_plus(b, r.gamma_hi)
            if not lo - tol <= x[e - 1] <= hi + tol:
                out.append(f"x({e})={x[e - 1]} outside band [{lo}, {hi}] at j={r.j}")
        top = r.s_j
    return out
