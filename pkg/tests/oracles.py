"""Independent reference computations used by the tests.

None of these import the code paths they check.
"""

from fractions import Fraction

import numpy as np


def _sign(x):
    return (x > 0) - (x < 0)


# (sign(b1-b2), sign(f1-f2), sign(b1-f2), sign(f1-b2)) -> token, worked out by
# hand from the endpoint definitions of each relation.
ENDPOINT_SIGNS = {
    (0, 0, -1, 1): "q",
    (-1, -1, -1, -1): "b",
    (1, 1, 1, 1): "bi",
    (-1, -1, -1, 0): "m",
    (1, 1, 0, 1): "mi",
    (-1, -1, -1, 1): "o",
    (1, 1, -1, 1): "oi",
    (-1, 1, -1, 1): "c",
    (1, -1, -1, 1): "ci",
    (0, -1, -1, 1): "s",
    (0, 1, -1, 1): "si",
    (-1, 0, -1, 1): "f",
    (1, 0, -1, 1): "fi",
}


def relation_by_signs(b1, f1, b2, f2):
    return ENDPOINT_SIGNS[(_sign(b1 - b2), _sign(f1 - f2), _sign(b1 - f2), _sign(f1 - b2))]


def primary_predicates(b1, f1, b2, f2):
    """The seven primary predicates, each evaluated literally."""
    return {
        "q": b1 == b2 and f1 == f2,
        "b": f1 < b2,
        "m": f1 == b2,
        "o": b1 < b2 < f1 < f2,
        "c": b1 < b2 and f2 < f1,
        "s": b1 == b2 and f1 < f2,
        "f": b1 < b2 and f1 == f2,
    }


def all_predicates(b1, f1, b2, f2):
    """Thirteen predicates: primaries, and inverses as primaries on swapped arguments."""
    out = primary_predicates(b1, f1, b2, f2)
    swapped = primary_predicates(b2, f2, b1, f1)
    for tok in ("b", "m", "o", "c", "s", "f"):
        out[tok + "i"] = swapped[tok]
    return out


def coverage_relfreq(triples, label):
    """Relative frequency by counting covered unit time slots.

    ``triples`` are raw ``(label, begin, finish)``; slot ``t`` is ``[t, t+1)``.
    Same-label intervals are disjoint, so counting slots equals summing
    durations, but this never looks at a duration.
    """
    lo = min(b for _, b, _ in triples)
    hi = max(f for _, _, f in triples)
    covered = 0
    for t in range(lo, hi):
        if any(l == label and b <= t < f for l, b, f in triples):
            covered += 1
    return Fraction(covered, hi - lo)


def mean_support(sequences, label):
    """Support as the plain mean of per-sequence coverage frequencies."""
    vals = [coverage_relfreq(s, label) for s in sequences]
    return sum(vals, Fraction(0)) / len(vals)


def gini(counts):
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return 1.0 - float((p * p).sum())
