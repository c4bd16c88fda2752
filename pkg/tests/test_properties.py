"""Randomized structural properties on small instances.

Every test draws from a seeded RNG, so failures replay exactly.  The
contracts checked here hold with equality or as theorems, not up to
tolerance, except where floating point enters (stationarity, entropy).
"""

import math
import random

import pytest

from cmshift import counting, katok, measures
from cmshift.graphs import enumerate_words

from properties import (
    brute_escape_count,
    brute_first_return_count,
    brute_loop_count,
    brute_min_cover,
    marked_preserving_permutation,
    random_strongly_connected_graph,
    relabeled,
    walks,
)


def graphs_under_test(seed, count=12, **kw):
    rng = random.Random(seed)
    return [random_strongly_connected_graph(rng, **kw) for _ in range(count)]


# ---------------------------------------------------------------------------
# counting


def test_loop_counts_match_brute_force():
    for g in graphs_under_test(101, max_symbols=4):
        series = counting.loop_count(g, 1, 7)
        for n in range(1, 8):
            assert series.value(n) == brute_loop_count(g, 1, n)


def test_first_returns_match_brute_force():
    for g in graphs_under_test(102, max_symbols=4):
        series = counting.first_return_count(g, 1, 7)
        for n in range(1, 8):
            assert series.value(n) == brute_first_return_count(g, 1, n)


def test_renewal_identity():
    # loops decompose uniquely at their first return: z_n = sum f_k z_{n-k}
    for g in graphs_under_test(103, max_symbols=5):
        z = [1] + counting.loop_count(g, 1, 8).counts
        f = [0] + counting.first_return_count(g, 1, 8).counts
        for n in range(1, 9):
            assert z[n] == sum(f[k] * z[n - k] for k in range(1, n + 1))


def test_loop_counts_superadditive():
    # concatenating two loops at the vertex is again a loop
    for g in graphs_under_test(104, max_symbols=5):
        z = counting.loop_count(g, 1, 9)
        for m in range(1, 5):
            for n in range(1, 5):
                assert z.value(m + n) >= z.value(m) * z.value(n)


def test_escape_counts_match_brute_force():
    rng = random.Random(105)
    for g in graphs_under_test(106, count=8, max_symbols=4):
        q = rng.randint(1, g.symbols - 1)
        M = rng.randint(1, 4)
        series = counting.escape_count(g, M=M, q=q, n_max=6)
        for n in range(0, 7):
            assert series.value(n) == brute_escape_count(g, M, q, n)


def test_escape_counts_decrease_in_budget_parameter():
    # a larger M shrinks the allowance floor((n+2)/M) of marked positions
    for g in graphs_under_test(107, count=8, max_symbols=4):
        q = 1
        by_M = [counting.escape_count(g, M=M, q=q, n_max=8) for M in (1, 2, 4, 8)]
        for n in range(0, 9):
            vals = [s.value(n) for s in by_M]
            assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_pinned_escape_counts_sum_to_total():
    rng = random.Random(108)
    for g in graphs_under_test(109, count=8, max_symbols=4):
        q = rng.randint(1, g.symbols)
        M = rng.randint(1, 3)
        total = counting.escape_count(g, M=M, q=q, n_max=5)
        for n in range(0, 6):
            split = sum(
                counting.escape_count_pinned(g, M=M, q=q, a=a, b=b, n_max=5).value(n)
                for a in range(1, q + 1)
                for b in range(1, q + 1)
            )
            assert split == total.value(n)


def test_escape_counts_invariant_under_marked_relabeling():
    rng = random.Random(110)
    for g in graphs_under_test(111, count=8, max_symbols=5):
        q = rng.randint(1, g.symbols - 1)
        sigma = marked_preserving_permutation(rng, g.symbols, q)
        h = relabeled(g, sigma)
        a = counting.escape_count(g, M=2, q=q, n_max=7).counts
        b = counting.escape_count(h, M=2, q=q, n_max=7).counts
        assert a == b


# ---------------------------------------------------------------------------
# measures


def test_parry_measure_is_stationary_and_consistent():
    for g in graphs_under_test(112, max_symbols=5):
        mu = measures.parry_measure(g)
        assert mu.is_stationary
        assert abs(sum(mu.cylinder_mass((v,)) for v in range(1, g.symbols + 1)) - 1) < 1e-9
        for w in walks(g, 2):
            parent = mu.cylinder_mass(w)
            children = sum(
                mu.cylinder_mass(w + (v,)) for v in g.out_neighbors(w[-1])
            )
            assert abs(children - parent) < 1e-12
            shifted = sum(
                mu.cylinder_mass((v,) + w) for v in g.in_neighbors(w[0])
            )
            assert abs(shifted - parent) < 1e-12


def test_parry_measure_maximizes_entropy():
    rng = random.Random(113)
    for g in graphs_under_test(114, count=6, max_symbols=4):
        mu = measures.parry_measure(g)
        for _ in range(20):
            transitions = {}
            for i in range(1, g.symbols + 1):
                outs = g.out_neighbors(i)
                weights = [
                    mu.P[i - 1, j - 1] * (1 + 0.5 * rng.random()) for j in outs
                ]
                s = sum(weights)
                for j, w in zip(outs, weights):
                    transitions[(i, j)] = w / s
            nu = measures.markov_measure(g, transitions)
            assert nu.entropy <= mu.entropy + 1e-9


# ---------------------------------------------------------------------------
# covering numbers


def test_greedy_cover_matches_exhaustive_search():
    rng = random.Random(115)
    checked = 0
    for g in graphs_under_test(116, count=10, max_symbols=3):
        mu = measures.parry_measure(g)
        for n in (2, 3):
            words = enumerate_words(g, n)
            if len(words) > 14:
                continue
            masses = [mu.cylinder_mass(w) for w in words]
            for delta in (0.1, 0.3, 0.5):
                assert katok.covering_number(mu, g, n, delta) == brute_min_cover(
                    masses, delta
                )
                checked += 1
    assert checked >= 12


def test_covering_number_monotone_in_delta():
    for g in graphs_under_test(117, count=6, max_symbols=4):
        mu = measures.parry_measure(g)
        for n in (2, 4):
            ns = [
                katok.covering_number(mu, g, n, d)
                for d in (0.05, 0.1, 0.2, 0.4, 0.6)
            ]
            assert all(a >= b for a, b in zip(ns, ns[1:]))
