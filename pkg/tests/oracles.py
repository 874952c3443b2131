"""Independent reference evaluations used to freeze expected values.

These deliberately avoid the package's own data structures so that a bug in
an implementation cannot hide in a shared helper.
"""

from itertools import product


def oracle_score(categories, needs_by_category, nsl, importance, sat_rows, action):
    """Direct double sum over categories then needs, with urgency = 1 - level."""
    row = sat_rows.get(action, {})
    total = 0.0
    for c in categories:
        inner = 0.0
        for n in needs_by_category[c]:
            inner += row.get(n, 0.0) * (1.0 - nsl[n])
        total += inner * importance[c]
    return total


def oracle_argmax(categories, needs_by_category, nsl, importance, sat_rows, actions):
    scored = [(oracle_score(categories, needs_by_category, nsl, importance, sat_rows, a), a) for a in actions]
    best = max(s for s, _ in scored)
    return min(a for s, a in scored if s == best)


def pairwise_gini(values):
    n = len(values)
    mean = sum(values) / n
    if mean == 0:
        return 0.0
    diffs = sum(abs(x - y) for x, y in product(values, repeat=2))
    return diffs / (2 * n * n * mean)


def largest_remainder(size, shares):
    """Hamilton apportionment by hand: floor, then hand out leftovers by remainder."""
    from fractions import Fraction

    quotas = [(k, Fraction(str(v)) * size) for k, v in shares]
    counts = {k: q.numerator // q.denominator for k, q in quotas}
    left = size - sum(counts.values())
    order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i][1] - counts[quotas[i][0]]), i))
    for i in order[:left]:
        counts[quotas[i][0]] += 1
    return counts
