"""Entropy through covering numbers of cylinder sets.

For an ergodic measure, the minimal number N(n, delta) of n-cylinders
whose union carries mass strictly greater than 1 - delta grows at the
exponential rate h(mu), for every fixed delta in (0, 1).  This module
computes the covering numbers exactly (greedy selection of the heaviest
cylinders, which is optimal for this objective) and fits the rate.
"""

import math
from dataclasses import dataclass

from . import counting, measures
from .errors import CapacityError, ValidationError
from .graphs import FiniteGraph, enumerate_words


def _markov_masses(measure, graph, n, cap):
    """All (mass > 0) n-cylinder masses of a stationary chain, by graph DFS."""
    out = []
    stack = [
        ((v,), float(measure.pi[v - 1]))
        for v in range(graph.symbols, 0, -1)
        if measure.pi[v - 1] > 0.0
    ]
    while stack:
        word, mass = stack.pop()
        if len(word) == n:
            out.append(mass)
            if len(out) > cap:
                raise CapacityError(f"more than {cap} cylinders of length {n}")
            continue
        a = word[-1]
        for b in reversed(graph.out_neighbors(a)):
            p = float(measure.P[a - 1, b - 1])
            if p > 0.0:
                stack.append((word + (b,), mass * p))
    return out


def _generic_masses(measure, graph, n, cap):
    words = enumerate_words(graph, n, cap=cap)
    return [m for m in (measure.cylinder_mass(w) for w in words) if m > 0.0]


def covering_number(measure, graph, n, delta, cap=2**20):
    """Minimal number of n-cylinders with total mass strictly above 1 - delta.

    Sorting the cylinder masses in decreasing order and taking the shortest
    prefix whose sum exceeds 1 - delta is optimal: any family of k cylinders
    has mass at most the sum of the k largest masses.
    """
    if not isinstance(graph, FiniteGraph):
        raise ValidationError("covering numbers need a finite graph; truncate first")
    if not 0.0 < delta < 1.0:
        raise ValidationError("delta must be in (0, 1)")
    if n < 1:
        raise ValidationError("cylinder length must be >= 1")
    if isinstance(measure, measures.MarkovMeasure):
        masses = _markov_masses(measure, graph, n, cap)
    else:
        masses = _generic_masses(measure, graph, n, cap)
    masses.sort(reverse=True)
    need = 1.0 - delta
    total = 0.0
    for k, m in enumerate(masses, start=1):
        total += m
        if total > need:
            return k
    raise ValidationError(
        "the cylinders of this length fail to cover the measure "
        "(is the measure supported on this graph?)"
    )


@dataclass(frozen=True)
class KatokReport:
    rate: float
    delta: float
    counts: counting.CountSeries
    window: tuple


def katok_estimate(measure, graph, delta, n_max, n_min=1, cap=2**20):
    """Fitted exponential growth rate of the covering numbers N(n, delta).

    Exact counts for n = n_min..n_max, then an affine fit of log N(n)
    against n over the last half of the range.  For an ergodic measure the
    rate estimates its entropy, independently of delta.
    """
    if n_max < n_min:
        raise ValidationError("n_max must be >= n_min")
    values = [
        covering_number(measure, graph, n, delta, cap=cap)
        for n in range(n_min, n_max + 1)
    ]
    series = counting.CountSeries(
        label=f"covering(delta={delta})",
        start=n_min,
        counts=values,
        meta={"delta": delta},
    )
    est = counting.growth_rate(series, method="affine-fit")
    return KatokReport(rate=est.rate, delta=delta, counts=series, window=est.window)
