"""Decomposition solver for arbitrary convex costs under ascending constraints.

The solver works from the right end of the index range towards the left.
Each iteration looks at the still-unassigned prefix ``[1, s_prev - 1]``,
computes for every start ``l`` the least marginal-cost level ``eta_l`` at
which the coordinates ``[l, s_prev - 1]`` can absorb their own demand, and
fixes the smallest such level ``Gamma``. A block ``[s, s_prev - 1]`` ending at
``s_prev - 1`` is then assigned values inside the bands
``[H-(Gamma), H+(Gamma)]`` so that its suffix demand is met exactly.

Levels are strictly increasing from one iteration to the next, and the
result is optimal for every convex cost, smooth or not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ascendopt._levels import suffix_levels
from ascendopt._numeric import csum
from ascendopt.costs import NEG_INF, CostBank
from ascendopt.errors import InvariantError, NumericalError
from ascendopt.problem import Allocation, Instance, make_allocation, require_feasible

ETA_TOL = 1e-10
TIE_TOL = 1e-9
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class EtaSolution:
    l: int
    eta: float
    exists: bool


@dataclass(frozen=True)
class IterationRecord:
    j: int
    gamma_j: float
    s_j: int
    tied: tuple
    # Bracket actually used for the bands: H- is taken at gamma_lo and H+ at
    # gamma_hi. Both equal gamma_j up to float resolution.
    gamma_lo: float = field(default=None, compare=False)
    gamma_hi: float = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "gamma": _jsonable(self.gamma_j),
            "s": self.s_j,
            "tied": list(self.tied),
        }


@dataclass(frozen=True)
class DecompTrace:
    records: tuple
    allocation: Allocation
    eta_solves: int = 0

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "x": list(self.allocation.x),
            "objective": self.allocation.objective,
            "eta_solves": self.eta_solves,
        }


def _jsonable(v: float):
    return v if math.isfinite(v) else ("-inf" if v < 0 else "inf")


# -- scalar level search -------------------------------------------------------

def _window_sum(inst, lo_idx, hi_idx, eta, upper):
    return csum(
        (c.h_plus if upper else c.h_minus)(b, eta)
        for c, b in zip(inst.costs[lo_idx - 1:hi_idx], inst.beta[lo_idx - 1:hi_idx])
    )


def solve_eta(inst: Instance, l: int, hi: int, tol: float = ETA_TOL) -> EtaSolution:
    """Smallest level at which window ``[l, hi]`` (1-based) covers its demand.

    Scans the window's derivative breakpoints for the bracketing pair and
    bisects inside it until the bracket is narrower than ``tol``.
    """
    if not 1 <= l <= hi <= inst.n:
        raise ValueError(f"bad window [{l}, {hi}] for n={inst.n}")
    demand = csum(inst.alpha[l - 1:hi])
    if demand > csum(inst.beta[l - 1:hi]):
        return EtaSolution(l, math.nan, False)
    if demand <= 0:
        return EtaSolution(l, NEG_INF, True)

    def covers(eta):
        return _window_sum(inst, l, hi, eta, True) >= demand

    cand = sorted({p for c, b in zip(inst.costs[l - 1:hi], inst.beta[l - 1:hi])
                   for p in c.derivative_breakpoints(b)})
    k = next((i for i, p in enumerate(cand) if covers(p)), len(cand) - 1)
    if k == 0 or not covers(math.nextafter(cand[k], NEG_INF)):
        return EtaSolution(l, cand[k], True)
    lo, up = cand[k - 1], cand[k]
    for _ in range(MAX_BISECTIONS):
        if up - lo <= tol:
            return EtaSolution(l, up, True)
        mid = lo + 0.5 * (up - lo)
        if mid <= lo or mid >= up:
            return EtaSolution(l, up, True)
        if covers(mid):
            up = mid
        else:
            lo = mid
    raise NumericalError(f"level search did not converge on window [{l}, {hi}]")


# -- block selection -----------------------------------------------------------

def _bands(inst, s_prev, gamma, band):
    if band is not None:
        return band
    m = s_prev - 1
    hm = np.array([c.h_minus(b, gamma) for c, b in zip(inst.costs[:m], inst.beta[:m])])
    hp = np.array([c.h_plus(b, gamma) for c, b in zip(inst.costs[:m], inst.beta[:m])])
    return hm, hp


def _cmp_tol(inst):
    return 1e-9 * (1.0 + inst.total)


def subroutine1(inst: Instance, s_prev: int, tied, gamma: float, band=None) -> int:
    """Pick the left end ``s`` of the block fixed at level ``gamma``.

    ``tied`` lists the indices attaining the minimal level, in descending
    order. ``band`` optionally supplies precomputed ``(H-, H+)`` arrays for
    the coordinates ``1 .. s_prev - 1``.
    """
    tied = list(tied)
    if not tied:
        raise ValueError("tied index list is empty")
    if any(a <= b for a, b in zip(tied, tied[1:])) or tied[0] >= s_prev:
        raise ValueError("tied indices must be strictly descending and below s_prev")
    _, hp = _bands(inst, s_prev, gamma, band)
    tol = _cmp_tol(inst)
    alpha = inst.alpha

    def absorbs(m, k):
        return csum(hp[m - 1:k - 1]) >= csum(alpha[m - 1:k - 1]) - tol

    r = len(tied)
    i, t = 0, 1
    while t < r:
        if absorbs(tied[t], tied[i]):
            i = t
        t += 1
    return tied[i]


def subroutine2(inst: Instance, s_j: int, s_prev: int, gamma: float, tied_above,
                band=None) -> list[float]:
    """Assign ``x(e)`` for ``e`` in ``[s_j, s_prev - 1]`` inside the level bands.

    Returns the block's values in index order. Every value lies in
    ``[H-(gamma), H+(gamma)]`` and the suffix demand from ``s_j`` is met.
    """
    hm, hp = _bands(inst, s_prev, gamma, band)
    alpha = inst.alpha
    tol = _cmp_tol(inst)
    x = {}
    top = s_prev
    pending = [l for l in tied_above if s_j < l < s_prev]
    while True:
        chain = pending + [s_j]
        gaps = [csum(alpha[l - 1:top - 1]) - csum(hm[l - 1:top - 1]) for l in chain]
        gamma_fill = min(gaps)
        if gamma_fill < -tol:
            raise InvariantError(f"negative fill amount {gamma_fill!r} for block ending at {top - 1}")
        t = max(i for i, g in enumerate(gaps) if g <= gamma_fill + tol)
        first, pinned_to = chain[0], chain[t]
        remaining = max(gamma_fill, 0.0)
        for e in range(top - 1, first - 1, -1):
            v = min(hp[e - 1], hm[e - 1] + remaining)
            remaining -= v - hm[e - 1]
            x[e] = float(v)
        if remaining > 1e-7 * (1.0 + inst.total):
            raise InvariantError(f"fill amount does not fit into the bands above {first}")
        for e in range(pinned_to, first):
            x[e] = float(hm[e - 1])
        if pinned_to == s_j:
            break
        pending = [
            l for l in pending
            if l < pinned_to and csum(hp[l - 1:pinned_to - 1]) >= csum(alpha[l - 1:pinned_to - 1]) - tol
        ]
        top = pinned_to
    return [x[e] for e in range(s_j, s_prev)]


# -- driver --------------------------------------------------------------------

def _suffix(values):
    # Exact suffix sums, one per start index.
    n = len(values)
    return np.array([csum(values[i:]) for i in range(n)]) if n < 64 else _suffix_fast(values)


def _suffix_fast(values):
    out = np.empty(len(values))
    acc, comp = 0.0, 0.0
    for i in range(len(values) - 1, -1, -1):
        v = values[i]
        t = acc + v
        comp += (acc - t) + v if abs(acc) >= abs(v) else (v - t) + acc
        acc = t
        out[i] = acc + comp
    return out


def solve(inst: Instance, tol: float = ETA_TOL, tie_tol: float = TIE_TOL) -> DecompTrace:
    """Run the decomposition solver and return its trace and allocation."""
    require_feasible(inst)
    n = inst.n
    beta = np.array(inst.beta)
    x = np.zeros(n)
    records = []
    s_prev = n + 1
    eta_solves = 0
    j = 0
    while s_prev > 1:
        j += 1
        m = s_prev - 1
        bank = CostBank(inst.costs[:m])
        cap = beta[:m]
        demand = _suffix(inst.alpha[:m])
        room = _suffix(inst.beta[:m])
        rows = np.nonzero(demand <= room)[0]
        eta_solves += m
        lo, hi = suffix_levels(bank, cap, demand[rows], rows, max_iter=MAX_BISECTIONS, atol=tol)
        gamma = float(hi.min())
        if math.isfinite(gamma):
            near = hi <= gamma + tie_tol
        else:
            near = hi == gamma
        tied = tuple(int(r) + 1 for r in rows[near][::-1])
        g_lo, g_hi = float(lo[near].min()), float(hi[near].max())
        band = (bank.h(g_lo, cap, False), bank.h(g_hi, cap, True))
        s_j = subroutine1(inst, s_prev, tied, gamma, band)
        above = [l for l in tied if s_j < l]
        x[s_j - 1:m] = subroutine2(inst, s_j, s_prev, gamma, above, band)
        records.append(IterationRecord(j, gamma, s_j, tied, g_lo, g_hi))
        s_prev = s_j
    return DecompTrace(tuple(records), make_allocation(inst, x.tolist()), eta_solves)


def decomp_solve(inst: Instance, tol: float = ETA_TOL) -> Allocation:
    return solve(inst, tol).allocation
