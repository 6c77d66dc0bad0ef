"""Shared multiplier search: smallest level meeting a demand over suffix windows.

Given a window of costs with truncation caps (and optional floors), a list of
suffix windows ``[start_r, m)`` and demands ``target_r``, find for each row
the smallest ``eta`` with ``sum H+(eta) >= target_r``. Because ``H-`` is the
left-continuous version of ``H+``, that ``eta`` also satisfies
``sum H-(eta) <= target_r``; it is therefore the minimal level sandwiching
the demand.

The search brackets ``eta`` between consecutive derivative breakpoints and
then bisects until the bracket is narrower than ``atol`` or a relative
width of 1e-13 (or down to adjacent floats), returning ``lo <= eta* <= hi``. Rows whose
demand is already met by the floors get ``lo = hi = -inf``.
"""

from __future__ import annotations

import numpy as np

from ascendopt.costs import NEG_INF, CostBank
from ascendopt.errors import NumericalError

MAX_BISECTIONS = 200
# Brackets narrower than this (relative to max(1, |eta|)) count as resolved.
LEVEL_RTOL = 1e-13


def _suffix_sums(mat: np.ndarray) -> np.ndarray:
    # Column s of the result is sum over columns >= s.
    return np.cumsum(mat[..., ::-1], axis=-1)[..., ::-1]


def suffix_levels(bank: CostBank, cap: np.ndarray, targets: np.ndarray, starts: np.ndarray,
                  floor: np.ndarray | None = None, max_iter: int = MAX_BISECTIONS,
                  rtol: float = LEVEL_RTOL, atol: float = 0.0):
    """Return ``(lo, hi)`` arrays bracketing each row's minimal level."""
    targets = np.asarray(targets, dtype=float)
    starts = np.asarray(starts, dtype=int)
    r = len(targets)
    lo = np.full(r, NEG_INF)
    hi = np.full(r, NEG_INF)
    if r == 0:
        return lo, hi
    m = bank.n
    base = np.zeros(m) if floor is None else np.asarray(floor, dtype=float)
    base_sum = _suffix_sums(base)[starts]
    live = np.nonzero(targets > base_sum)[0]
    if live.size == 0:
        return lo, hi

    cand = bank.breakpoints(cap)
    upper_at = _suffix_sums(bank.h(cand[:, None], cap, True, floor))[:, starts[live]]
    reached = upper_at >= targets[live]
    # Rounding can leave the fully saturated sum a hair below the demand.
    k = np.where(reached.any(axis=0), reached.argmax(axis=0), len(cand) - 1)
    hi[live] = cand[k]
    lo[live] = np.where(k > 0, cand[np.maximum(k - 1, 0)], cand[k])

    # Pure jump: the sum stays short all the way up to the breakpoint.
    below = np.nextafter(hi[live], NEG_INF)
    short = _window_sums(bank, cap, floor, below, starts[live]) < targets[live]
    exact = live[short | (k == 0)]
    lo[exact] = hi[exact]

    todo = live[~(short | (k == 0))]
    for _ in range(max_iter):
        if todo.size == 0:
            return lo, hi
        width = hi[todo] - lo[todo]
        mid = lo[todo] + 0.5 * width
        scale = np.maximum(1.0, np.maximum(np.abs(lo[todo]), np.abs(hi[todo])))
        done = (mid <= lo[todo]) | (mid >= hi[todo]) | (width <= np.maximum(atol, rtol * scale))
        todo, mid = todo[~done], mid[~done]
        if todo.size == 0:
            return lo, hi
        ok = _window_sums(bank, cap, floor, mid, starts[todo]) >= targets[todo]
        hi[todo[ok]] = mid[ok]
        lo[todo[~ok]] = mid[~ok]
    raise NumericalError(f"level search did not converge for windows starting at {starts[todo].tolist()}")


def _window_sums(bank, cap, floor, eta, starts):
    vals = bank.h(eta[:, None], cap, True, floor)
    cols = np.arange(bank.n)
    return np.where(cols[None, :] >= starts[:, None], vals, 0.0).sum(axis=1)

