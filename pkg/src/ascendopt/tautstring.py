"""Taut-string solver for d-separable costs ``w_e(x) = d_e * phi(x / d_e)``.

With such costs the optimum does not depend on ``phi``: it is read off the
least concave majorant of the points ``(D_i, E_i)``, where ``D`` and ``E``
are the running sums of ``d`` and ``alpha``. Each coordinate receives
``d_e`` times the slope of the majorant over ``(D_{e-1}, D_e]``.

The majorant is built by a single left-to-right sweep with neighbour links:
each new point is checked against its left neighbour, and every dropped
point triggers a re-check of the neighbour to its left.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

from ascendopt._numeric import cumsum
from ascendopt.costs import DSeparable
from ascendopt.errors import CapabilityError
from ascendopt.problem import Allocation, Instance, make_allocation, require_feasible

BETA_TOL = 1e-9


@dataclass(frozen=True)
class CoverPoint:
    index: int
    D: float
    E: float
    d: float = 0.0   # width of the coordinate ending here (0 at the origin)


@dataclass(frozen=True)
class ConcaveCover:
    retained: tuple        # every kept index, including 0 and n
    ln: tuple              # left neighbour per index, None once dropped
    rn: tuple              # right neighbour per index, None once dropped
    visits: int

    @property
    def change_indices(self) -> tuple:
        return self.retained[1:-1]


def build_points(inst: Instance) -> list[CoverPoint]:
    """Cumulative points ``(D_i, E_i)``, ``i = 0..n``."""
    costs = inst.costs
    if not all(isinstance(c, DSeparable) for c in costs):
        raise CapabilityError("the taut-string solver needs d-separable costs on every coordinate")
    kinds = {c.phi for c in costs}
    if len(kinds) > 1:
        raise CapabilityError("the taut-string solver needs one common phi across coordinates")
    d = [c.d for c in costs]
    big_d = cumsum(d)
    big_e = cumsum(inst.alpha)
    pts = [CoverPoint(0, 0.0, 0.0)]
    pts.extend(CoverPoint(i, big_d[i], big_e[i], d[i - 1]) for i in range(1, inst.n + 1))
    return pts


def _above(p, q, r) -> bool:
    # Slope p->q strictly exceeds slope q->r, by cross products.
    return (q.E - p.E) * (r.D - q.D) > (r.E - q.E) * (q.D - p.D)


def string_cover(points: Sequence[CoverPoint]) -> ConcaveCover:
    """Least concave majorant of ``points`` by the neighbour-link sweep."""
    n = len(points) - 1
    if n < 1:
        raise ValueError("need at least two points")
    ln = [i - 1 for i in range(n + 1)]
    rn = [i + 1 for i in range(n + 1)]
    ln[0] = None
    rn[n] = None
    visits = 0
    for j in range(1, n):
        visits += 1
        i = j
        while True:
            visits += 1
            left, right = ln[i], rn[i]
            if _above(points[left], points[i], points[right]):
                break
            rn[left], ln[right] = right, left
            ln[i] = rn[i] = None
            if left == 0:
                break
            i = left
    kept = [0]
    while rn[kept[-1]] is not None:
        kept.append(rn[kept[-1]])
    return ConcaveCover(tuple(kept), tuple(ln), tuple(rn), visits)


def cover_values(points: Sequence[CoverPoint], cover: ConcaveCover) -> list[float]:
    """Majorant evaluated at every ``D_i``."""
    out = []
    kept = cover.retained
    seg = 0
    for p in points:
        while seg + 1 < len(kept) - 1 and p.index > kept[seg + 1]:
            seg += 1
        a, b = points[kept[seg]], points[kept[seg + 1]]
        if p.index in (a.index, b.index):
            out.append(p.E)
        else:
            out.append(a.E + (b.E - a.E) * (p.D - a.D) / (b.D - a.D))
    return out


def segment_slopes(points: Sequence[CoverPoint], cover: ConcaveCover) -> list[float]:
    """Slope of the majorant over ``(D_{e-1}, D_e]`` for ``e = 1..n``."""
    out = []
    kept = cover.retained
    for a, b in zip(kept, kept[1:]):
        pa, pb = points[a], points[b]
        slope = (pb.E - pa.E) / (pb.D - pa.D)
        out.extend([slope] * (b - a))
    return out


def recover_allocation(points: Sequence[CoverPoint], cover: ConcaveCover, inst: Instance) -> Allocation:
    """``x(e) = d_e * slope`` on the segment covering coordinate ``e``.

    Raises :class:`CapabilityError` when the result breaks a capacity,
    since this solver does not handle binding upper bounds.
    """
    slopes = segment_slopes(points, cover)
    x = [points[e].d * s for e, s in zip(range(1, len(points)), slopes)]
    for e, (v, b) in enumerate(zip(x, inst.beta), start=1):
        if v > b + BETA_TOL * max(1.0, b):
            raise CapabilityError(
                f"capacity beta({e})={b!r} binds (taut-string value {v!r}); use another solver"
            )
    return make_allocation(inst, x)


@dataclass(frozen=True)
class TautResult:
    allocation: Allocation
    points: tuple
    cover: ConcaveCover


def solve(inst: Instance) -> TautResult:
    require_feasible(inst)
    pts = build_points(inst)
    cover = string_cover(pts)
    return TautResult(recover_allocation(pts, cover, inst), tuple(pts), cover)


def path_length(points: Sequence[CoverPoint], cover: ConcaveCover) -> float:
    """Euclidean length of the majorant polyline."""
    kept = cover.retained
    return math.fsum(
        math.hypot(points[b].D - points[a].D, points[b].E - points[a].E)
        for a, b in zip(kept, kept[1:])
    )


def write_path_csv(path, points: Sequence[CoverPoint], cover: ConcaveCover) -> None:
    values = cover_values(points, cover)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "D", "E", "cover_value"])
        for p, v in zip(points, values):
            w.writerow([p.index, repr(p.D), repr(p.E), repr(v)])
