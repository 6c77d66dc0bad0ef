"""Seeded instance families. Every family produces feasible instances.

Feasibility is guaranteed by construction: either ``beta >= alpha``
coordinatewise or each capacity equals the total demand.
"""

from __future__ import annotations

import random

from ascendopt.costs import DSeparable, PhiKind, PiecewiseLinear, PowerP, Quadratic
from ascendopt.problem import Instance

FAMILIES = ("random-quadratic", "random-pwl", "inventory", "power-alloc", "dsep")


def _r2(v: float) -> float:
    return round(v, 2)


def random_quadratic(n: int, rng: random.Random) -> Instance:
    alpha = [_r2(rng.uniform(0, 3)) for _ in range(n)]
    beta = [_r2(a + rng.uniform(0.5, 2)) for a in alpha]
    costs = [Quadratic(_r2(rng.uniform(0.5, 3)), _r2(rng.uniform(-1, 1))) for _ in range(n)]
    return Instance(alpha, beta, costs)


def _random_pwl(rng: random.Random, segments: int) -> PiecewiseLinear:
    pts = [(0, rng.randint(-3, 3))]
    for _ in range(segments - 1):
        pts.append((pts[-1][0] + rng.randint(1, 3), pts[-1][1] + rng.randint(0, 3)))
    return PiecewiseLinear(pts)


def random_pwl(n: int, rng: random.Random) -> Instance:
    alpha = [rng.randint(0, 4) for _ in range(n)]
    beta = [a + rng.randint(1, 4) for a in alpha]
    costs = [_random_pwl(rng, rng.randint(1, 4)) for _ in range(n)]
    return Instance(alpha, beta, costs)


def inventory(n: int, rng: random.Random) -> Instance:
    # Per-period order quantity with a shortage credit below a target
    # level and a holding charge above it.
    alpha = [rng.randint(0, 6) for _ in range(n)]
    beta = [a + rng.randint(2, 6) for a in alpha]
    costs = []
    for a in alpha:
        target = a + rng.randint(0, 2)
        short, hold = rng.randint(1, 5), rng.randint(1, 5)
        pts = [(0, -short), (target, hold)] if target > 0 else [(0, hold)]
        costs.append(PiecewiseLinear(pts))
    return Instance(alpha, beta, costs)


def power_alloc(n: int, rng: random.Random) -> Instance:
    alpha = [_r2(rng.uniform(0, 2)) for _ in range(n)]
    beta = [_r2(a + rng.uniform(0.5, 3)) for a in alpha]
    costs = [PowerP(_r2(rng.uniform(0.5, 2)), rng.choice((1.5, 2.0, 2.5, 3.0))) for _ in range(n)]
    return Instance(alpha, beta, costs)


def dsep(n: int, rng: random.Random, phi: PhiKind = PhiKind.SQUARE) -> Instance:
    alpha = [_r2(rng.uniform(0, 3)) for _ in range(n)]
    d = [_r2(rng.uniform(0.5, 2)) for _ in range(n)]
    cap = max(sum(alpha), 1.0)
    return Instance(alpha, [cap] * n, [DSeparable(v, phi) for v in d])


_BUILDERS = {
    "random-quadratic": random_quadratic,
    "random-pwl": random_pwl,
    "inventory": inventory,
    "power-alloc": power_alloc,
    "dsep": dsep,
}


def generate(family: str, n: int, seed: int) -> Instance:
    if family not in _BUILDERS:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    if n < 1:
        raise ValueError("n must be positive")
    return _BUILDERS[family](n, random.Random(seed))
