"""Gurevich entropy, loop generating functions, recurrence classification,
and entropy at infinity.

For a loop system with counts a_l, the first-return generating function is
f(x) = sum a_l x**l, with radius of convergence R = 1/growth. The entropy is
log(1/x_c) where x_c = min(x*, R) and x* is the root of f(x) = 1 when it
exists. The classification follows the shape of f at its radius:

* f(R) < 1 (certified by partial sums plus a tail bound): transient,
* a root x* < R: positive recurrent (the mean loop length at x* converges
  geometrically because x* is strictly inside the radius),
* root exactly at the radius: null recurrent when the mean loop length
  diverges there, positive recurrent when it converges.

The entropy at infinity is approached from two sides: `big_delta_inf` reads
the certified loop growth of the presentation, and `delta_inf` fits escape
count series z_n(M, q) on a grid of budgets M and thresholds q, taking the
smallest fitted rate as the headline estimate.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .counting import GrowthEstimate, escape_count, growth_rate, loop_count
from .errors import NotStronglyConnected, ValidationError
from .graphs import FiniteGraph, GeometricTail, LoopSystem

# ---------------------------------------------------------------------------
# Perron roots of finite graphs


def _sccs(graph):
    """Strongly connected components, iterative Tarjan."""
    n = graph.symbols
    index = {}
    low = {}
    on_stack = set()
    stack = []
    out = []
    counter = [0]
    for root in range(1, n + 1):
        if root in index:
            continue
        work = [(root, iter(graph.out_neighbors(root)))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for u in it:
                if u not in index:
                    index[u] = low[u] = counter[0]
                    counter[0] += 1
                    stack.append(u)
                    on_stack.add(u)
                    work.append((u, iter(graph.out_neighbors(u))))
                    advanced = True
                    break
                if u in on_stack:
                    low[v] = min(low[v], index[u])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def perron_root(graph, tol=1e-13, max_iter=20000):
    """Spectral radius of the adjacency (multiplicity) matrix.

    Certified Collatz brackets on A+I per strongly connected component;
    the shift by the identity removes periodicity.
    """
    mult = graph.edge_multiplicities()
    best = 0.0
    for comp in _sccs(graph):
        comp = sorted(comp)
        pos = {v: i for i, v in enumerate(comp)}
        k = len(comp)
        a = np.zeros((k, k))
        has_edge = False
        for v in comp:
            for u in graph.out_neighbors(v):
                if u in pos:
                    a[pos[v], pos[u]] = mult[(v, u)]
                    has_edge = True
        if not has_edge:
            continue
        if k == 1:
            best = max(best, a[0, 0])
            continue
        b = a + np.eye(k)
        v = np.ones(k)
        lam = 1.0
        for _ in range(max_iter):
            w = b @ v
            ratios = w / v
            lo, hi = ratios.min(), ratios.max()
            lam = 0.5 * (lo + hi)
            v = w / w.max()
            if hi - lo < tol:
                break
        best = max(best, lam - 1.0)
    return best


# ---------------------------------------------------------------------------
# loop generating functions


class LoopGF:
    """The first-return series f(x) = sum a_l x**l with certified bounds."""

    def __init__(self, system):
        if not isinstance(system, LoopSystem):
            raise ValidationError("loop_gf needs a LoopSystem")
        self.system = system
        tail = system.tail
        if system.is_infinite:
            self.radius = 1.0 / tail.growth if tail.growth > 1 else 1.0
            if isinstance(tail, GeometricTail) and tail.growth == 1.0:
                # counts are eventually constant: radius exactly 1
                self.radius = 1.0
        else:
            self.radius = math.inf
        self._a = [0]

    def _count(self, length):
        while len(self._a) <= length:
            self._a.append(self.system.multiplicity(len(self._a)))
        return self._a[length]

    def _partial(self, x, upto):
        lim = self.system.max_loop_length()
        if lim is not None:
            upto = min(upto, lim)
        logx = math.log(x)
        terms = []
        for l in range(1, upto + 1):
            a = self._count(l)
            if not a:
                continue
            if a.bit_length() > 500:
                terms.append(math.exp(_log_int(a) + l * logx))
            else:
                terms.append(a * x ** l)
        return math.fsum(terms), upto

    def _tail_bounds(self, beyond, x):
        """Certified (lower, upper) for the sum of terms with length > beyond."""
        lim = self.system.max_loop_length()
        if lim is not None and beyond >= lim:
            return (0.0, 0.0)
        tail = self.system.tail
        if isinstance(tail, GeometricTail):
            hi = tail.upper_sum(beyond, x)
            # multiplicities floor(coeff * growth^l) undershoot the geometric
            # envelope by less than 1 per term; with integer parameters they
            # match it exactly
            if float(tail.coeff).is_integer() and float(tail.growth).is_integer():
                return (hi, hi)
            if x < 1.0 and math.isfinite(hi):
                loss = x ** (beyond + 1) / (1.0 - x)
                return (max(hi - loss, 0.0), hi)
            return (0.0, hi)
        if tail.upper_sum is None:
            return (0.0, math.inf)
        return (0.0, tail.upper_sum(beyond, x))

    def value_bounds(self, x, min_terms=256):
        """Certified (lower, upper) for f(x)."""
        if x < 0:
            raise ValidationError("x must be >= 0")
        if x == 0:
            return (0.0, 0.0)
        if x > self.radius * (1 + 1e-15):
            return (math.inf, math.inf)
        upto = min_terms
        while True:
            partial, used = self._partial(x, upto)
            tail_lo, tail_hi = self._tail_bounds(used, x)
            gap = tail_hi - tail_lo
            if gap <= max(1e-13, 1e-10 * partial) or upto >= 4096 or used < upto:
                break
            upto *= 2
        slack = 1e-13 * max(partial, 1.0)
        return (max(partial + tail_lo - slack, 0.0), partial + tail_hi + slack)

    def series_at_radius(self):
        """Certified bounds for f(R); (inf, inf) when R is infinite."""
        if self.radius == math.inf:
            return (math.inf, math.inf)
        return self.value_bounds(self.radius)

    def x_star(self, tol=1e-14):
        """The root of f(x) = 1 in (0, R], or None when f(R) < 1."""
        hi = None
        if self.radius < math.inf:
            lo_r, hi_r = self.series_at_radius()
            if hi_r < 1.0:
                return None
            if lo_r <= 1.0 <= hi_r:
                declared = getattr(self.system.tail, "series_at_radius", None)
                if declared is not None:
                    if declared < 1.0:
                        return None
                    if declared == 1.0:
                        return self.radius
                # fall through: bisect, the root is within tol of R anyway
            hi = self.radius
        if hi is None:
            hi = 1.0
            while self.value_bounds(hi)[0] <= 1.0:
                hi *= 2.0
                if hi > 1e9:
                    raise ValidationError("no finite root bracket")
        lo = 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            f_lo, f_hi = self.value_bounds(mid)
            if f_hi < 1.0:
                lo = mid
            elif f_lo > 1.0:
                hi = mid
            else:
                return mid
        return 0.5 * (lo + hi)


def loop_gf(system):
    return LoopGF(system)


def _log_int(c):
    if c.bit_length() <= 900:
        return math.log(c)
    shift = c.bit_length() - 900
    return math.log(c >> shift) + shift * math.log(2)


# ---------------------------------------------------------------------------
# entropy


@dataclass
class EntropyReport:
    value: float
    method: str
    truncations: list
    count_rate: float = None
    meta: dict = field(default_factory=dict)


def gurevich_entropy(graph, n_max=40, trace_qs=(4, 8, 16, 32, 64)):
    """Exponential growth rate of loop counts at a vertex.

    Finite graphs use certified Perron brackets. Loop systems solve
    f(x_c) = 1 on the first-return series (x_c capped at the radius) and
    corroborate with a truncation trace of Perron roots and, when n_max
    allows, a direct growth fit on exact loop counts.
    """
    if isinstance(graph, FiniteGraph):
        lam = perron_root(graph)
        value = math.log(lam) if lam > 0 else float("-inf")
        return EntropyReport(value, "perron", [(graph.symbols, value)])
    gf = loop_gf(graph)
    root = gf.x_star()
    x_c = gf.radius if root is None else min(root, gf.radius)
    value = math.log(1.0 / x_c)
    trace = []
    for q in trace_qs:
        lam = perron_root(graph.truncate(q).as_graph())
        trace.append((q, math.log(lam) if lam > 0 else float("-inf")))
    count_rate = None
    if n_max and n_max >= 8:
        count_rate = growth_rate(loop_count(graph, 1, n_max)).rate
    meta = {"x_star": root, "radius": gf.radius}
    return EntropyReport(value, "generating-function", trace, count_rate, meta)


# ---------------------------------------------------------------------------
# classification


@dataclass
class Classification:
    verdict: str
    entropy: float
    x_star: float = None
    radius: float = None
    reason: str = ""


def classify(graph):
    """Vere-Jones recurrence classification of an irreducible presentation."""
    if isinstance(graph, FiniteGraph):
        from .graphs import is_strongly_connected

        if not is_strongly_connected(graph):
            raise NotStronglyConnected("classification needs a strongly connected graph")
        h = gurevich_entropy(graph).value
        return Classification(
            "positive-recurrent", h, x_star=math.exp(-h), radius=None,
            reason="finite strongly connected graph",
        )
    gf = loop_gf(graph)
    root = gf.x_star()
    if root is None:
        return Classification(
            "transient", math.log(1.0 / gf.radius), x_star=None, radius=gf.radius,
            reason="first-return series stays below 1 at its radius",
        )
    h = math.log(1.0 / min(root, gf.radius))
    if gf.radius == math.inf or root < gf.radius * (1 - 1e-12):
        return Classification(
            "positive-recurrent", h, x_star=root, radius=gf.radius,
            reason="root strictly inside the radius, mean loop length finite",
        )
    diverges = getattr(graph.tail, "mean_diverges", None)
    if diverges is True:
        return Classification(
            "null-recurrent", h, x_star=root, radius=gf.radius,
            reason="root at the radius with divergent mean loop length",
        )
    if diverges is False:
        return Classification(
            "positive-recurrent", h, x_star=root, radius=gf.radius,
            reason="root at the radius with convergent mean loop length",
        )
    return Classification(
        "inconclusive", h, x_star=root, radius=gf.radius,
        reason="root at the radius, mean behaviour not certified",
    )


# ---------------------------------------------------------------------------
# entropy at infinity


def big_delta_inf(graph):
    """Certified loop growth at infinity: limsup (1/l) log a_l.

    Finite presentations are compact, so no mass escapes: -inf.
    """
    if isinstance(graph, FiniteGraph):
        return float("-inf")
    if not graph.is_infinite:
        return float("-inf")
    return math.log(graph.tail.growth)


@dataclass
class DeltaCell:
    M: int
    q: int
    rate: float
    empty: bool
    nonzero: int
    estimate: GrowthEstimate = None


@dataclass
class DeltaInfGrid:
    cells: dict
    headline: float
    n_max: int
    method: str

    def to_json(self):
        return {
            "headline": self.headline,
            "n_max": self.n_max,
            "method": self.method,
            "cells": [
                {
                    "M": c.M,
                    "q": c.q,
                    "rate": c.rate,
                    "empty": c.empty,
                    "nonzero": c.nonzero,
                }
                for c in self.cells.values()
            ],
        }


def delta_inf(graph, Ms=(8, 16), qs=(1, 2, 4), n_max=40,
              method="affine-fit", window=None, max_states=None):
    """Escape-rate grid: fit the growth of z_n(M, q) per cell.

    The headline is the smallest fitted rate over the non-empty cells
    (larger budgets M give tighter cells); -inf when every cell is empty.
    """
    cells = {}
    for M in Ms:
        for q in qs:
            series = escape_count(graph, M=M, q=q, n_max=n_max, max_states=max_states)
            nonzero = sum(1 for c in series.counts if c)
            est = growth_rate(series, method=method, window=window)
            cells[(M, q)] = DeltaCell(M, q, est.rate, nonzero == 0, nonzero, est)
    live = [c.rate for c in cells.values() if not c.empty]
    headline = min(live) if live else float("-inf")
    return DeltaInfGrid(cells, headline, n_max, method)


# ---------------------------------------------------------------------------
# strong positive recurrence


@dataclass
class SprVerdict:
    spr: bool
    entropy: float
    delta_inf: float
    margin: float
    threshold: float


def is_spr(graph, threshold=0.02):
    """Entropy gap at infinity: SPR when h - Delta_inf exceeds the threshold."""
    h = gurevich_entropy(graph).value
    d = big_delta_inf(graph)
    margin = h - d
    if math.isnan(margin):
        margin = 0.0
    return SprVerdict(margin > threshold, h, d, margin, threshold)
