"""Plain order-statistic VaR / ES, written independently of the weighted code."""

import math


def unweighted_var(xs, p):
    xs = sorted(xs)
    n = len(xs)
    r = 1.0 - p
    for x in xs:
        above = sum(1 for y in xs if y > x)
        if above / n <= r:
            return x
    raise AssertionError("unreachable")


def unweighted_es(xs, p):
    """``(1/r) sum_j y_(j) |((j-1)/n, j/n] cap (0, r]|`` over descending order statistics."""
    ys = sorted(xs, reverse=True)
    n = len(ys)
    r = 1.0 - p
    terms = []
    for j, y in enumerate(ys, start=1):
        length = min(j / n, r) - min((j - 1) / n, r)
        if length > 0:
            terms.append(y * length)
    return math.fsum(terms) / r
