"""Approximating a non-ergodic mixture by one ergodic measure.

Oracles:
  - the concatenated system alternating golden-mean blocks and free
    blocks of length n = 4 over M = 2 slots has exactly 5 * 8 = 40
    closed block cycles of length 8, so its entropy is log(40)/8
    (golden-mean walks of 3 edges from vertex 1: F(5) = 5 of them;
    free walks: 2^3),
  - a right-resolving presentation preserves entropy, so the labeled
    measure's entropy equals the Perron entropy of the unrolled graph
    and is bounded below by log(product of block counts) / period,
  - sampled generic words follow the chain's support and their Birkhoff
    averages land within beta by construction; on the golden-mean chain
    no single-symbol frequency can sit within 0.01 of the stationary
    masses for 10-step words, so sampling must exhaust.
"""

import math

import pytest

from cmshift import density, measures, thermo
from cmshift.errors import ConnectorNotFound, SamplingExhausted
from cmshift.families import full_shift, golden_mean
from cmshift.graphs import FiniteGraph

LOG2 = math.log(2)


def test_concatenated_entropy_closed_form():
    cs = density.concatenated_system(
        full_shift(2), [golden_mean(), full_shift(2)], n=4, M=2
    )
    want = math.log(40) / 8
    assert abs(thermo.gurevich_entropy(cs.graph).value - want) < 1e-9
    assert cs.block_counts == (5, 8)


def test_concatenated_measure_basics():
    cs = density.concatenated_system(
        full_shift(2), [golden_mean(), full_shift(2)], n=4, M=2
    )
    nu = density.concatenated_measure(cs)
    assert abs(nu.cylinder_mass((1,)) + nu.cylinder_mass((2,)) - 1.0) < 1e-9
    # shift consistency: mass of [a] equals the mass of its extensions
    for a in (1, 2):
        ext = nu.cylinder_mass((a, 1)) + nu.cylinder_mass((a, 2))
        assert abs(nu.cylinder_mass((a,)) - ext) < 1e-9
    # the free blocks allow the word 22, forbidden in the golden support
    assert nu.cylinder_mass((2, 2)) > 0.0
    assert abs(nu.entropy - math.log(40) / 8) < 1e-9
    assert nu.entropy >= cs.entropy_floor - 1e-12


def test_concatenated_entropy_floor():
    cs = density.concatenated_system(
        full_shift(2), [golden_mean(), full_shift(2)], n=4, M=2
    )
    assert abs(cs.entropy_floor - math.log(40) / 8) < 1e-12


def test_connector_not_found():
    chain = FiniteGraph(3, [(1, 2), (2, 3), (3, 3)])
    with pytest.raises(ConnectorNotFound):
        density.concatenated_system(chain, [chain], n=3, M=1)


def test_connector_inserted_when_needed():
    # block ends at vertex 3, which has no edge back to 1 but a path 3->2->1
    ambient = FiniteGraph(3, [(1, 2), (2, 3), (3, 2), (2, 1), (1, 1)])
    cs = density.concatenated_system(ambient, [ambient], n=3, M=1)
    nu = density.concatenated_measure(cs)
    assert nu.entropy > 0.0
    total = sum(nu.cylinder_mass((a,)) for a in (1, 2, 3))
    assert abs(total - 1.0) < 1e-9


def test_generic_words_bernoulli():
    g = full_shift(2)
    mu = measures.bernoulli_measure(g, (0.5, 0.5))
    words = density.generic_words(mu, g, n=200, count=5, beta=0.1, seed=1)
    assert len(words) == 5
    assert len(set(words)) == 5
    for w in words:
        freq = sum(1 for a in w if a == 1) / len(w)
        assert abs(freq - 0.5) <= 0.1


def test_generic_words_respect_support_and_anchors():
    g = golden_mean()
    mu = measures.parry_measure(g)
    words = density.generic_words(
        mu, g, n=120, count=4, beta=0.1, anchors=(1,), seed=3
    )
    for w in words:
        assert w[0] == 1 and w[-1] == 1
        assert all(not (a == 2 and b == 2) for a, b in zip(w, w[1:]))


def test_generic_words_exhaustion():
    g = golden_mean()
    mu = measures.parry_measure(g)
    # single-symbol frequencies of 10-step words sit on a grid of step 0.1;
    # the stationary masses are > 0.02 away from every grid point
    with pytest.raises(SamplingExhausted):
        density.generic_words(
            mu, g, n=10, count=3, beta=0.01, seed=0, max_tries=500
        )


def test_two_component_demo_small():
    rep = density.two_component_demo(n=16, M=4, depth=4)
    assert rep.rho < 0.1
    assert rep.gap < 0.1
    assert abs(rep.entropy_target - 0.5 * (math.log((1 + math.sqrt(5)) / 2) + LOG2)) < 1e-9
    assert rep.entropy_built > 0.4


def test_two_component_demo_gets_closer_with_depth():
    near = density.two_component_demo(n=32, M=4, depth=4)
    far = density.two_component_demo(n=8, M=4, depth=4)
    assert near.rho < far.rho
