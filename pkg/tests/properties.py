"""Shared helpers for the randomized property suite.

The oracles here enumerate walks explicitly (word-by-word recursion over
out-edges), independent of the transfer-matrix and renewal recursions under
test.  Instances stay tiny — at most 5 symbols and words of length <= 9 —
so exhaustive enumeration is exact and fast.
"""

import itertools
import random

from cmshift.graphs import FiniteGraph, is_strongly_connected


def random_strongly_connected_graph(rng, max_symbols=5, p=0.5):
    """A random simple strongly connected graph on 2..max_symbols symbols."""
    while True:
        s = rng.randint(2, max_symbols)
        edges = [
            (i, j)
            for i in range(1, s + 1)
            for j in range(1, s + 1)
            if rng.random() < p
        ]
        if not edges:
            continue
        g = FiniteGraph(s, edges)
        if is_strongly_connected(g):
            return g


def walks(graph, length, start=None):
    """All walks x_0..x_length, one symbol per step, as tuples."""
    starts = [start] if start is not None else range(1, graph.symbols + 1)
    acc = [(v,) for v in starts]
    for _ in range(length):
        acc = [w + (v,) for w in acc for v in graph.out_neighbors(w[-1])]
    return acc


def brute_loop_count(graph, vertex, n):
    """Number of walks of n edges from vertex back to itself."""
    return sum(1 for w in walks(graph, n, start=vertex) if w[-1] == vertex)


def brute_first_return_count(graph, vertex, n):
    """Loops of n edges at vertex whose interior avoids vertex."""
    return sum(
        1
        for w in walks(graph, n, start=vertex)
        if w[-1] == vertex and all(x != vertex for x in w[1:-1])
    )


def brute_escape_count(graph, M, q, n, a=None, b=None):
    """Words x_0..x_{n+1} with endpoints <= q (or pinned to a, b) and at
    most floor((n+2)/M) positions at symbols <= q."""
    budget = (n + 2) // M
    total = 0
    for w in walks(graph, n + 1):
        if a is None:
            if w[0] > q or w[-1] > q:
                continue
        else:
            if w[0] != a or w[-1] != b:
                continue
        if sum(1 for x in w if x <= q) <= budget:
            total += 1
    return total


def brute_min_cover(masses, delta):
    """Smallest number of cylinders whose total mass exceeds 1 - delta,
    checked over every subset."""
    best = None
    for k in range(1, len(masses) + 1):
        for combo in itertools.combinations(masses, k):
            if sum(combo) > 1 - delta:
                best = k
                break
        if best is not None:
            break
    return best


def relabeled(graph, sigma):
    """The graph with symbol i renamed to sigma[i] (a dict or list lookup)."""
    edges = {
        (sigma[i], sigma[j]): m for (i, j), m in graph.edge_multiplicities().items()
    }
    return FiniteGraph(graph.symbols, edges)


def marked_preserving_permutation(rng, symbols, q):
    """A random permutation of 1..symbols mapping {1..q} onto itself."""
    low = list(range(1, min(q, symbols) + 1))
    high = list(range(min(q, symbols) + 1, symbols + 1))
    rng.shuffle(low)
    rng.shuffle(high)
    image = low + high
    return {i + 1: image[i] for i in range(symbols)}
