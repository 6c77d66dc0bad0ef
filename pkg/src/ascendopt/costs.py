"""Per-coordinate convex costs and their generalized derivative inverses.

Every cost ``w`` lives on ``[0, b)`` with ``b = domain_upper`` (possibly
infinite). Besides evaluation each cost exposes its one-sided derivatives
``w+``/``w-`` and the saturated, truncated inverses ``H-``/``H+``:

    H-(eta) = 0         if eta <= w+(0)
              i-(eta)   if w+(0) < eta <= w-(beta)
              beta      if eta > w-(beta)

with ``i-(eta) = inf{z : w+(z) >= eta}``, and symmetrically ``H+`` built from
``i+(eta) = sup{z : w-(z) <= eta}``. Derivative sentinels at the domain edge
are the IEEE infinities, never large finite numbers.
"""

from __future__ import annotations

import bisect
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

NEG_INF = -math.inf
POS_INF = math.inf


class PhiKind(str, Enum):
    """Inner function of a d-separable cost ``d * phi(x / d)``."""

    SQUARE = "square"
    HYPOT = "hypot"


class ConvexCost(ABC):
    """Abstract convex cost on ``[0, domain_upper)``."""

    domain_upper: float
    smooth = True

    @abstractmethod
    def _value(self, x: float) -> float: ...

    @abstractmethod
    def _right(self, z: float) -> float: ...

    @abstractmethod
    def _left(self, z: float) -> float: ...

    @abstractmethod
    def _inv_minus(self, eta: float) -> float: ...

    @abstractmethod
    def _inv_plus(self, eta: float) -> float: ...

    def value(self, x: float) -> float:
        if x < 0 or x > self.domain_upper:
            raise ValueError(f"{x!r} outside the domain [0, {self.domain_upper}]")
        return self._value(x)

    def __call__(self, x: float) -> float:
        return self.value(x)

    def right_derivative(self, z: float) -> float:
        if z < 0 or z >= self.domain_upper:
            raise ValueError(f"right derivative undefined at {z!r}")
        return self._right(z)

    def left_derivative(self, z: float) -> float:
        # The closed right end is accepted: w-(b) is the limit from inside.
        if z < 0 or z > self.domain_upper:
            raise ValueError(f"left derivative undefined at {z!r}")
        if z == 0:
            return NEG_INF
        return self._left(z)

    def _check_beta(self, beta: float) -> None:
        if not (0 < beta <= self.domain_upper):
            raise ValueError(f"beta={beta!r} must lie in (0, {self.domain_upper}]")

    def h_minus(self, beta: float, eta: float) -> float:
        self._check_beta(beta)
        if eta <= self._right(0.0):
            return 0.0
        if eta > self._left(beta):
            return float(beta)
        return min(max(self._inv_minus(eta), 0.0), float(beta))

    def h_plus(self, beta: float, eta: float) -> float:
        self._check_beta(beta)
        if eta < self._right(0.0):
            return 0.0
        if eta >= self._left(beta):
            return float(beta)
        return min(max(self._inv_plus(eta), 0.0), float(beta))

    def derivative_breakpoints(self, beta: float) -> list[float]:
        """Sorted eta values where ``H-`` or ``H+`` may jump or kink."""
        self._check_beta(beta)
        return sorted({self._right(0.0), self._left(beta)})

    # Vectorised unclamped inverse over an array of multipliers. Subclasses
    # whose instances can be stacked override ``_stack``.
    def _inverse_array(self, eta: np.ndarray, upper: bool) -> np.ndarray:
        f = self._inv_plus if upper else self._inv_minus
        return np.vectorize(f, otypes=[float])(eta)

    def _stack_key(self):
        return None


@dataclass(frozen=True)
class Quadratic(ConvexCost):
    """``w(x) = a x^2 + b x`` with ``a > 0``."""

    a: float
    b: float = 0.0
    domain_upper: float = POS_INF

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("quadratic cost needs a > 0")
        _check_upper(self.domain_upper)

    def _value(self, x):
        return self.a * x * x + self.b * x

    def _right(self, z):
        return 2.0 * self.a * z + self.b

    _left = _right

    def _inv_minus(self, eta):
        return (eta - self.b) / (2.0 * self.a)

    _inv_plus = _inv_minus

    def _stack_key(self):
        return "quadratic"

    @staticmethod
    def _stacked_inverse(costs, eta, upper):
        a = np.array([c.a for c in costs])
        b = np.array([c.b for c in costs])
        return (eta - b) / (2.0 * a)


@dataclass(frozen=True)
class PowerP(ConvexCost):
    """``w(x) = lam * x**p`` with ``lam > 0`` and ``p > 1``."""

    lam: float
    p: float
    domain_upper: float = POS_INF

    def __post_init__(self):
        if not self.lam > 0 or not self.p > 1:
            raise ValueError("power cost needs lam > 0 and p > 1")
        _check_upper(self.domain_upper)

    def _value(self, x):
        return self.lam * x**self.p

    def _right(self, z):
        return self.lam * self.p * z ** (self.p - 1.0)

    _left = _right

    def _inv_minus(self, eta):
        if eta <= 0:
            return 0.0
        if eta == POS_INF:
            return POS_INF
        return (eta / (self.lam * self.p)) ** (1.0 / (self.p - 1.0))

    _inv_plus = _inv_minus

    def _stack_key(self):
        return "power"

    @staticmethod
    def _stacked_inverse(costs, eta, upper):
        lam = np.array([c.lam for c in costs])
        p = np.array([c.p for c in costs])
        pos = np.where(eta > 0, eta, 0.0)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out = (pos / (lam * p)) ** (1.0 / (p - 1.0))
        return np.where(eta > 0, out, 0.0)


@dataclass(frozen=True)
class DSeparable(ConvexCost):
    """``w(x) = d * phi(x / d)`` for ``phi`` in :class:`PhiKind`."""

    d: float
    phi: PhiKind = PhiKind.SQUARE
    domain_upper: float = POS_INF

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError("d-separable cost needs d > 0")
        object.__setattr__(self, "phi", PhiKind(self.phi))
        _check_upper(self.domain_upper)

    def _value(self, x):
        if self.phi is PhiKind.SQUARE:
            return x * x / self.d
        return math.hypot(x, self.d)

    def _right(self, z):
        if self.phi is PhiKind.SQUARE:
            return 2.0 * z / self.d
        return z / math.hypot(z, self.d)

    _left = _right

    def _inv_minus(self, eta):
        if self.phi is PhiKind.SQUARE:
            return eta * self.d / 2.0
        if eta <= 0:
            return 0.0
        if eta >= 1:
            return POS_INF
        return eta * self.d / math.sqrt((1.0 - eta) * (1.0 + eta))

    _inv_plus = _inv_minus

    def _stack_key(self):
        return ("dsep", self.phi.value)

    @staticmethod
    def _stacked_inverse(costs, eta, upper):
        d = np.array([c.d for c in costs])
        if costs[0].phi is PhiKind.SQUARE:
            return eta * d / 2.0
        with np.errstate(invalid="ignore", divide="ignore"):
            mid = eta * d / np.sqrt((1.0 - eta) * (1.0 + eta))
        return np.where(eta <= 0, 0.0, np.where(eta >= 1, POS_INF, mid))


@dataclass(frozen=True)
class PiecewiseLinear(ConvexCost):
    """Convex piecewise-linear cost.

    ``points`` lists ``(start, slope)`` pairs: the segment beginning at
    ``start`` has the given slope until the next start. The first start must
    be 0; starts strictly increase and slopes never decrease. ``offset`` is
    ``w(0)``.
    """

    points: tuple
    offset: float = 0.0
    domain_upper: float = POS_INF
    smooth = False

    def __post_init__(self):
        pts = tuple((float(x), float(m)) for x, m in self.points)
        if not pts:
            raise ValueError("piecewise-linear cost needs at least one segment")
        if pts[0][0] != 0.0:
            raise ValueError("first segment must start at 0")
        for (x0, m0), (x1, m1) in zip(pts, pts[1:]):
            if not x1 > x0:
                raise ValueError("segment starts must be strictly increasing")
            if m1 < m0:
                raise ValueError("slopes must be nondecreasing (convexity)")
        if any(not math.isfinite(v) for p in pts for v in p):
            raise ValueError("segment data must be finite")
        _check_upper(self.domain_upper)
        if pts[-1][0] >= self.domain_upper:
            raise ValueError("last segment starts outside the domain")
        object.__setattr__(self, "points", pts)

    @property
    def starts(self):
        return [p[0] for p in self.points]

    @property
    def slopes(self):
        return [p[1] for p in self.points]

    def _value(self, x):
        total = self.offset
        pts = self.points
        for k, (start, slope) in enumerate(pts):
            if x <= start:
                break
            end = pts[k + 1][0] if k + 1 < len(pts) else POS_INF
            total += slope * (min(x, end) - start)
        return total

    def _right(self, z):
        return self.points[bisect.bisect_right(self.starts, z) - 1][1]

    def _left(self, z):
        return self.points[bisect.bisect_left(self.starts, z) - 1][1]

    def _inv_minus(self, eta):
        k = bisect.bisect_left(self.slopes, eta)
        return self.points[k][0] if k < len(self.points) else POS_INF

    def _inv_plus(self, eta):
        k = bisect.bisect_right(self.slopes, eta)
        return self.points[k][0] if k < len(self.points) else POS_INF

    def derivative_breakpoints(self, beta):
        self._check_beta(beta)
        pts = {m for x, m in self.points if x <= beta}
        pts.add(self._left(beta))
        return sorted(pts)

    def _inverse_array(self, eta, upper):
        slopes = np.array(self.slopes)
        starts = np.append(np.array(self.starts), POS_INF)
        k = np.searchsorted(slopes, eta, side="right" if upper else "left")
        return starts[k]


def _check_upper(b):
    if not b > 0:
        raise ValueError("domain_upper must be positive")


# -- module-level operations -------------------------------------------------

def right_derivative(cost: ConvexCost, z: float) -> float:
    return cost.right_derivative(z)


def left_derivative(cost: ConvexCost, z: float) -> float:
    return cost.left_derivative(z)


def h_minus(cost: ConvexCost, beta: float, eta: float) -> float:
    return cost.h_minus(beta, eta)


def h_plus(cost: ConvexCost, beta: float, eta: float) -> float:
    return cost.h_plus(beta, eta)


def derivative_breakpoints(cost: ConvexCost, beta: float) -> list[float]:
    return cost.derivative_breakpoints(beta)


class CostBank:
    """Vectorised ``H-``/``H+`` over a fixed list of costs.

    Costs of the same closed-form family are stacked into parameter arrays
    so that one numpy expression evaluates the whole group; the remaining
    (piecewise-linear) costs are evaluated column by column.
    """

    def __init__(self, costs: Sequence[ConvexCost]):
        self.costs = list(costs)
        self.n = len(self.costs)
        groups: dict = {}
        singles = []
        for i, c in enumerate(self.costs):
            key = c._stack_key()
            if key is None:
                singles.append(i)
            else:
                groups.setdefault(key, []).append(i)
        self._stacked = [
            (np.array(idx), type(self.costs[idx[0]])._stacked_inverse, [self.costs[i] for i in idx])
            for idx in groups.values()
        ]
        self._singles = singles
        self._lower_at_zero = np.array([c._right(0.0) for c in self.costs])

    def inverse(self, eta: np.ndarray, upper: bool, cols=None) -> np.ndarray:
        """Unclamped generalized inverse, broadcasting ``eta`` to ``(..., n)``."""
        eta = np.asarray(eta, dtype=float)
        shape = np.broadcast_shapes(eta.shape, (self.n,))
        eta = np.broadcast_to(eta, shape)
        out = np.empty(shape)
        for idx, fn, costs in self._stacked:
            out[..., idx] = fn(costs, eta[..., idx], upper)
        for i in self._singles:
            out[..., i] = self.costs[i]._inverse_array(eta[..., i], upper)
        return out

    def h(self, eta, cap, upper: bool, floor=None) -> np.ndarray:
        """``H+`` (``upper=True``) or ``H-`` truncated to ``[floor, cap]``."""
        out = np.clip(self.inverse(eta, upper), 0.0, cap)
        if floor is not None:
            out = np.maximum(out, floor)
        return out

    def breakpoints(self, cap, idx=None) -> np.ndarray:
        idx = range(self.n) if idx is None else idx
        pts = []
        for i in idx:
            c = self.costs[i]
            if cap[i] > 0:
                pts.extend(c.derivative_breakpoints(float(cap[i])))
            else:
                pts.append(c._right(0.0))
        return np.unique(np.array(pts, dtype=float))
