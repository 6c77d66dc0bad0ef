"""Small numeric helpers: compensated summation and tolerant comparisons."""

import math


def csum(values):
    """Correctly rounded sum of an iterable of floats."""
    return math.fsum(values)


def cumsum(values):
    """Running sums computed with Neumaier compensation.

    Returns a list of length ``len(values) + 1`` starting at 0.0.
    """
    out = [0.0]
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out.append(total + comp)
    return out
