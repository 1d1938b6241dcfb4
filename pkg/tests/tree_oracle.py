"""Exhaustive small-tree search in exact rational arithmetic."""

from fractions import Fraction


def exact_sse(targets, groups):
    total = Fraction(0)
    for g in groups:
        vals = [Fraction(targets[i]) for i in g]
        mean = sum(vals) / len(vals)
        total += sum((v - mean) ** 2 for v in vals)
    return total


def candidate_splits(rows, idx):
    """Every (left, right) partition a midpoint threshold can produce on ``idx``."""
    out = []
    for f in range(len(rows[0])):
        values = sorted({rows[i][f] for i in idx})
        for lo, hi in zip(values, values[1:]):
            thr = (lo + hi) / 2.0
            left = tuple(i for i in idx if rows[i][f] <= thr)
            right = tuple(i for i in idx if rows[i][f] > thr)
            out.append((left, right))
    return out


def partitions(rows, idx, leaves, depth):
    """All leaf partitions of ``idx`` reachable with at most ``leaves`` leaves."""
    yield (tuple(idx),)
    if leaves < 2 or depth < 1:
        return
    for left, right in candidate_splits(rows, idx):
        for k in range(1, leaves):
            for pl in partitions(rows, left, k, depth - 1):
                for pr in partitions(rows, right, leaves - k, depth - 1):
                    if len(pl) + len(pr) <= leaves:
                        yield pl + pr


def optimum_sse(rows, targets, max_leaves, max_depth=4):
    idx = tuple(range(len(targets)))
    return min(exact_sse(targets, p) for p in partitions(rows, idx, max_leaves, max_depth))


def seeded_cases(count=200, seed=2024):
    """Small datasets: n in 1..8, one or two features, max_leaves in 1..3.

    Values are drawn from a coarse grid so that ties and repeated x values occur.
    """
    from sailprice.rng import XorShift64Star

    rng = XorShift64Star(seed)
    cases = []
    for _ in range(count):
        n = 1 + rng.below(8)
        p = 1 + rng.below(2)
        max_leaves = 1 + rng.below(3)
        rows = [[float(rng.below(6)) for _ in range(p)] for _ in range(n)]
        targets = [float(rng.below(21)) - 10.0 for _ in range(n)]
        cases.append((rows, targets, max_leaves))
    return cases
