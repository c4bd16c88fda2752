"""Shift-invariant measures and weak-star limit diagnostics.

Measures expose a common surface: `cylinder_mass(word)` for the mass of the
cylinder [word] at the canonical symbols, `entropy`, and `mass` (total mass,
1 for probability measures). Three concrete kinds:

* `MarkovMeasure`: a stationary Markov chain on a finite graph.
* `LoopMarkovMeasure`: a loop system chain, collapsed to a choice
  distribution over loop lengths (uniform within a length class). The base
  is visited once per loop, so mu([1]) = 1/E[length], and the suspension
  entropy is sum w_l (log a_l - log w_l) / E.
* `MixtureMeasure`: a convex combination; entropy is the matching convex
  combination (affine on ergodic components).

`cylinder_limit` takes a schedule of measures, extrapolates per-cylinder
masses (iterated Aitken, exact on geometric tails), sums a mass ladder over
truncations, and optionally verifies the limit against a candidate measure
by fitting a single scale factor.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotStronglyConnected, ValidationError
from .graphs import FiniteGraph, LoopSystem, canonical_cylinders, is_strongly_connected


def _log_int(c):
    if c.bit_length() <= 900:
        return math.log(c)
    shift = c.bit_length() - 900
    return math.log(c >> shift) + shift * math.log(2)


# ---------------------------------------------------------------------------
# Markov measures on finite graphs


class MarkovMeasure:
    """Stationary Markov chain (pi, P) supported on a finite graph."""

    def __init__(self, graph, pi, P, label="markov"):
        if not isinstance(graph, FiniteGraph):
            raise ValidationError("MarkovMeasure needs a finite graph")
        self.graph = graph
        self.label = label
        n = graph.symbols
        self.pi = np.asarray(pi, dtype=float)
        self.P = np.asarray(P, dtype=float)
        if self.pi.shape != (n,) or self.P.shape != (n, n):
            raise ValidationError("pi/P shapes do not match the graph")
        for (i, j), _ in (
            ((i, j), None) for i in range(1, n + 1) for j in range(1, n + 1)
        ):
            if self.P[i - 1, j - 1] > 0 and not graph.is_edge(i, j):
                raise ValidationError(f"P({i},{j}) > 0 off the graph")
        self.mass = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(self.P > 0, np.log(np.where(self.P > 0, self.P, 1.0)), 0.0)
        self.entropy = float(-np.sum(self.pi[:, None] * self.P * logs))

    @property
    def is_stationary(self):
        return bool(np.max(np.abs(self.pi @ self.P - self.pi)) < 1e-9)

    def cylinder_mass(self, word):
        p = self.pi[word[0] - 1]
        for a, b in zip(word, word[1:]):
            p *= self.P[a - 1, b - 1]
            if p == 0.0:
                return 0.0
        return float(p)


def markov_measure(graph, transitions, pi=None):
    """Markov measure from a transition dict {(i, j): prob}.

    When pi is omitted the stationary vector is computed from P.
    """
    n = graph.symbols
    P = np.zeros((n, n))
    for (i, j), p in transitions.items():
        if not graph.is_edge(i, j):
            raise ValidationError(f"({i},{j}) is not an edge")
        if p < 0:
            raise ValidationError("transition probabilities must be >= 0")
        P[i - 1, j - 1] = p
    rows = P.sum(axis=1)
    if np.max(np.abs(rows - 1.0)) > 1e-9:
        raise ValidationError("transition rows must sum to 1")
    if pi is None:
        v = np.ones(n) / n
        for _ in range(200000):
            w = 0.5 * (v + v @ P)  # lazy chain: aperiodic for irreducible P
            if np.max(np.abs(w - v)) < 1e-15:
                v = w
                break
            v = w
        pi = v / v.sum()
    return MarkovMeasure(graph, pi, P)


def parry_measure(graph):
    """The maximal-entropy Markov chain of a strongly connected graph."""
    if not isinstance(graph, FiniteGraph):
        raise ValidationError("parry_measure needs a finite graph")
    if not is_strongly_connected(graph):
        raise NotStronglyConnected("the Parry chain needs a strongly connected graph")
    n = graph.symbols
    a = np.zeros((n, n))
    for (i, j), m in graph.edge_multiplicities().items():
        a[i - 1, j - 1] = m
    b = a + np.eye(n)  # primitive for strongly connected graphs
    v = np.ones(n)
    u = np.ones(n)
    lam = 1.0
    for _ in range(100000):
        w = b @ v
        ratios = w / v
        lam = 0.5 * (ratios.min() + ratios.max())
        v = w / w.max()
        z = u @ b
        left_ratios = z / u
        u = z / z.max()
        if (
            ratios.max() - ratios.min() < 1e-14
            and left_ratios.max() - left_ratios.min() < 1e-14
        ):
            break
    lam -= 1.0
    P = a * v[None, :] / (lam * v[:, None])
    pi = u * v
    pi = pi / pi.sum()
    return MarkovMeasure(graph, pi, P, label="parry")


def bernoulli_measure(graph, probs):
    """Product measure on a full shift: every row of P equals probs."""
    n = graph.symbols
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (n,):
        raise ValidationError("probs must give one weight per symbol")
    if abs(probs.sum() - 1.0) > 1e-12 or (probs < 0).any():
        raise ValidationError("probs must be a probability vector")
    P = np.tile(probs, (n, 1))
    return MarkovMeasure(graph, probs, P, label="bernoulli")


# ---------------------------------------------------------------------------
# loop-chain measures


_BASE = ("base",)


class LoopMarkovMeasure:
    """Chain on a loop system given by choice weights over loop lengths.

    `weights[l]` is the total probability of picking a loop of length l at
    the base; within a length the a_l loops are equally likely.
    """

    def __init__(self, system, weights, entropy=None, label="loop-chain"):
        if not isinstance(system, LoopSystem):
            raise ValidationError("LoopMarkovMeasure needs a loop system")
        self.system = system
        self.label = label
        weights = {int(l): float(w) for l, w in weights.items() if w > 0}
        if not weights:
            raise ValidationError("weights are empty")
        total = math.fsum(weights.values())
        self.weights = {l: w / total for l, w in weights.items()}
        self._log_counts = {}
        for l in self.weights:
            a = system.multiplicity(l)
            if a < 1:
                raise ValidationError(f"no loops of length {l}")
            self._log_counts[l] = _log_int(a)
        self.expected_length = math.fsum(l * w for l, w in self.weights.items())
        if entropy is None:
            entropy = (
                math.fsum(
                    w * (self._log_counts[l] - math.log(w))
                    for l, w in self.weights.items()
                )
                / self.expected_length
            )
        self.entropy = float(entropy)
        self.mass = 1.0
        self._enum = None

    def _enumeration(self, max_id):
        if self._enum is None or self._enum.max_id < max_id:
            self._enum = self.system.enumeration(max_id)
        return self._enum

    def _per_loop(self, length):
        """Choice probability of one individual loop of this length."""
        w = self.weights.get(length, 0.0)
        if w == 0.0:
            return 0.0
        return math.exp(math.log(w) - self._log_counts[length])

    def _states(self, word):
        out = []
        top = max(word)
        enum = self._enumeration(top) if top > 1 else None
        for vid in word:
            if vid == 1:
                out.append(_BASE)
            else:
                length, pos = enum.locate(vid)
                out.append((length, pos, vid - pos + 1))
        return out

    def cylinder_mass(self, word):
        try:
            states = self._states(word)
        except ValidationError:
            return 0.0
        s0 = states[0]
        if s0 is _BASE:
            p = 1.0 / self.expected_length
        else:
            p = self._per_loop(s0[0]) / self.expected_length
        for s, t in zip(states, states[1:]):
            if p == 0.0:
                return 0.0
            if s is _BASE:
                if t is _BASE:
                    p *= self.weights.get(1, 0.0)
                elif t[1] == 1:
                    p *= self._per_loop(t[0])
                else:
                    return 0.0
            else:
                length, pos, first = s
                if pos < length - 1:
                    if t is _BASE or t[2] != first or t[1] != pos + 1:
                        return 0.0
                else:
                    if t is not _BASE:
                        return 0.0
        return p


def loop_mme(system, tol=1e-14, weight_cutoff=1e-13):
    """The maximal-entropy loop chain: weights a_l x*^l."""
    from .thermo import loop_gf

    gf = loop_gf(system)
    root = gf.x_star(tol=tol)
    if root is None:
        raise ValidationError("transient system: the loop series stays below 1")
    if gf.radius < math.inf and root >= gf.radius * (1 - 1e-12):
        diverges = getattr(system.tail, "mean_diverges", None)
        if diverges:
            raise ValidationError("null recurrent system: no maximal measure")
    weights = {}
    log_root = math.log(root)
    l = 1
    while l < 100000:
        a = system.multiplicity(l)
        if a:
            w = math.exp(_log_int(a) + l * log_root)
            weights[l] = w
        if l >= 8 and gf._tail_bounds(l, root)[1] < weight_cutoff:
            break
        lim = system.max_loop_length()
        if lim is not None and l >= lim:
            break
        l += 1
    return LoopMarkovMeasure(
        system, weights, entropy=math.log(1.0 / root), label="loop-mme"
    )


def _window_counts(system, lo, hi):
    counts = {}
    for l in range(lo, hi + 1):
        a = system.multiplicity(l)
        if a:
            counts[l] = a
    if not counts:
        raise ValidationError(f"no loops with length in [{lo}, {hi}]")
    return counts


def _window_value(counts, x):
    if x <= 0:
        return 0.0
    logx = math.log(x)
    total = 0.0
    for l, a in counts.items():
        e = _log_int(a) + l * logx
        total += math.exp(e) if e < 700 else math.inf
    return total


def _window_root(counts, tol=1e-15):
    hi = 1e-6
    while _window_value(counts, hi) < 1.0:
        hi *= 2.0
        if hi > 1e9:
            raise ValidationError("window series never reaches 1")
    lo = 0.0
    while hi - lo > tol * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if _window_value(counts, mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _window_measure(system, counts, y, label):
    logy = math.log(y)
    weights = {l: math.exp(_log_int(a) + l * logy) for l, a in counts.items()}
    return LoopMarkovMeasure(system, weights, label=label)


def tail_parry_measure(system, lo, hi):
    """Equilibrium chain of the sub-system of loops with length in [lo, hi]."""
    counts = _window_counts(system, lo, hi)
    x0 = _window_root(counts)
    return _window_measure(system, counts, x0, label=f"window-mme[{lo},{hi}]")


def tilted_loop_measure(system, y, lo, hi):
    """Loop chain with weights proportional to a_l y**l on [lo, hi]."""
    if y <= 0:
        raise ValidationError("y must be positive")
    counts = _window_counts(system, lo, hi)
    return _window_measure(system, counts, y, label=f"tilted[{lo},{hi}]")


def entropy_targeted_measure(system, target, lo, hi, iters=200):
    """Window chain with entropy at most `target`, as close as bisection gets.

    The tilt parameter y moves the window entropy monotonically from 0
    (concentrated on the shortest loops) to the window equilibrium value, so
    a target above that ceiling is unreachable.
    """
    counts = _window_counts(system, lo, hi)
    x0 = _window_root(counts)
    ceiling = _window_measure(system, counts, x0, "probe").entropy
    if target <= 0:
        raise ValidationError("target entropy must be positive")
    if target > ceiling - 1e-12:
        raise ValidationError(
            f"target {target} above the window ceiling {ceiling}"
        )
    y_lo, y_hi = x0 * 1e-12, x0
    for _ in range(iters):
        mid = 0.5 * (y_lo + y_hi)
        h = _window_measure(system, counts, mid, "probe").entropy
        if h <= target:
            y_lo = mid
        else:
            y_hi = mid
    return _window_measure(
        system, counts, y_lo, label=f"targeted[{lo},{hi}]@{target:.4g}"
    )


def periodic_loop_measure(system, length, ordinal=0):
    """The orbit measure of a single loop: entropy zero."""
    a = system.multiplicity(length)
    if a < 1 or ordinal >= a:
        raise ValidationError(f"no loop ({length}, {ordinal})")
    if length == 1:
        orbit = [1]
    else:
        first = 2
        l = 2
        while l < length:
            first += (l - 1) * system.multiplicity(l)
            l += 1
        first += ordinal * (length - 1)
        orbit = [1] + list(range(first, first + length - 1))
    return _PeriodicOrbitMeasure(system, orbit)


class _PeriodicOrbitMeasure:
    def __init__(self, system, orbit):
        self.system = system
        self.orbit = list(orbit)
        self.entropy = 0.0
        self.mass = 1.0
        self.label = f"periodic[{len(orbit)}]"

    def cylinder_mass(self, word):
        n = len(self.orbit)
        hits = 0
        for i in range(n):
            if all(self.orbit[(i + j) % n] == w for j, w in enumerate(word)):
                hits += 1
        return hits / n


# ---------------------------------------------------------------------------
# mixtures


class MixtureMeasure:
    """Convex combination of measures; entropy is the affine combination."""

    def __init__(self, components):
        self.components = [(float(c), m) for c, m in components]
        if any(c < 0 for c, _ in self.components):
            raise ValidationError("mixture weights must be >= 0")
        self.mass = math.fsum(c * m.mass for c, m in self.components)
        self.entropy = math.fsum(c * m.entropy for c, m in self.components)
        self.label = "mixture"

    def cylinder_mass(self, word):
        return math.fsum(c * m.cylinder_mass(word) for c, m in self.components)


# ---------------------------------------------------------------------------
# the cylinder metric


def rho_distance(mu, nu, graph, depth=3, symbol_cap=32):
    """Weighted cylinder distance: the k-th canonical cylinder (1-indexed)
    contributes 2**-k of the mass difference. The weight not covered by the
    enumeration is at most 2**-(number of cylinders)."""
    total = 0.0
    weight = 0.5
    for cyl in canonical_cylinders(graph, depth, symbol_cap):
        total += weight * abs(mu.cylinder_mass(cyl) - nu.cylinder_mass(cyl))
        weight *= 0.5
    return total


# ---------------------------------------------------------------------------
# limits of measure schedules


def _aitken_pass(xs):
    out = []
    for i in range(len(xs) - 2):
        x0, x1, x2 = xs[i : i + 3]
        d = (x2 - x1) - (x1 - x0)
        out.append(x2 if abs(d) < 1e-300 else x2 - (x2 - x1) ** 2 / d)
    return out

def _aitken_limit(xs):
    xs = list(xs)
    while len(xs) >= 3:
        nxt = _aitken_pass(xs)
        if not nxt:
            break
        xs = nxt
    return xs[-1]


@dataclass
class LimitReport:
    limits: dict
    mass: float
    ladder: list
    candidate_scale: float = None
    candidate_residual: float = None
    normalized_entropy: float = None
    meta: dict = field(default_factory=dict)


def cylinder_limit(schedule, graph, q_max=32, candidate=None, tol=1e-9):
    """Extrapolate the weak-star limit of a schedule of measures.

    Per-cylinder sequences are extrapolated by iterated Aitken (exact when
    the escape is geometric). The total mass comes from the candidate fit
    when one is supplied and matches within `tol`; otherwise from Aitken
    extrapolation of the mass ladder over truncations.
    """
    if len(schedule) < 3:
        raise ValidationError("a schedule needs at least 3 measures")
    if isinstance(graph, FiniteGraph):
        ids = list(range(1, min(graph.symbols, q_max) + 1))
        ladder_qs = [ids[-1]]
    else:
        trunc = graph.truncate(q_max)
        ids = list(range(1, trunc.vertex_count + 1))
        enum = graph.enumeration(q_max)
        ladder_qs = []
        for length, _, first in enum.rows:
            last = first + length - 2
            if last <= q_max and (not ladder_qs or last > ladder_qs[-1]):
                ladder_qs.append(last)
        if not ladder_qs or ladder_qs[-1] != ids[-1]:
            ladder_qs.append(ids[-1])

    limits = {}
    for a in ids:
        seq = [m.cylinder_mass((a,)) for m in schedule]
        limits[a] = max(_aitken_limit(seq), 0.0)

    running = 0.0
    by_q = {}
    for a in ids:
        running += limits[a]
        by_q[a] = running
    ladder = [(q, by_q[q]) for q in ladder_qs]
    if isinstance(graph, FiniteGraph):
        mass = running
    else:
        mass = _aitken_limit([s for _, s in ladder])

    scale = residual = entropy = None
    if candidate is not None:
        cand = {a: candidate.cylinder_mass((a,)) for a in ids}
        num = math.fsum(limits[a] * cand[a] for a in ids)
        den = math.fsum(cand[a] ** 2 for a in ids)
        if den > 0:
            scale = num / den
            residual = max(abs(limits[a] - scale * cand[a]) for a in ids)
            if residual <= tol:
                mass = scale * candidate.mass
                entropy = candidate.entropy
    return LimitReport(limits, mass, ladder, scale, residual, entropy)


# ---------------------------------------------------------------------------
# serialization


def measure_to_json(measure):
    """JSON-safe description of a measure.

    Chains carry their support edges, stationary vector, and transition
    rows; loop-length chains carry their length weights; mixtures nest.
    """
    if isinstance(measure, MarkovMeasure):
        size = measure.graph.symbols
        support = sorted(
            (i, j)
            for i in range(1, size + 1)
            for j in range(1, size + 1)
            if measure.P[i - 1, j - 1] > 0.0
        )
        return {
            "type": "markov",
            "label": measure.label,
            "symbols": size,
            "support": [list(e) for e in support],
            "pi": [float(x) for x in measure.pi],
            "P": [[float(x) for x in row] for row in measure.P],
            "entropy": measure.entropy,
            "mass": measure.mass,
        }
    if isinstance(measure, LoopMarkovMeasure):
        return {
            "type": "loop-chain",
            "label": measure.label,
            "weights": {str(l): w for l, w in sorted(measure.weights.items())},
            "expected_length": measure.expected_length,
            "entropy": measure.entropy,
            "mass": measure.mass,
        }
    if isinstance(measure, _PeriodicOrbitMeasure):
        return {
            "type": "periodic-loop",
            "label": measure.label,
            "orbit": list(measure.orbit),
            "entropy": measure.entropy,
            "mass": measure.mass,
        }
    if isinstance(measure, MixtureMeasure):
        return {
            "type": "mixture",
            "label": measure.label,
            "components": [
                {"weight": c, "measure": measure_to_json(m)}
                for c, m in measure.components
            ],
            "entropy": measure.entropy,
            "mass": measure.mass,
        }
    to_json = getattr(measure, "to_json", None)
    if to_json is not None:
        return to_json()
    raise ValidationError(f"cannot serialize measure type {type(measure).__name__}")


def save_measure_sequence(seq, dirpath, stem="measure"):
    """Write a sequence of measures to a directory, one JSON file per
    measure plus a manifest; returns the manifest path."""
    import json
    import os

    os.makedirs(dirpath, exist_ok=True)
    files = []
    for k, m in enumerate(seq):
        name = f"{stem}-{k:03d}.json"
        with open(os.path.join(dirpath, name), "w") as fh:
            json.dump(measure_to_json(m), fh, indent=2, sort_keys=True)
        files.append(name)
    manifest = {"kind": "measure-sequence", "count": len(files), "files": files}
    path = os.path.join(dirpath, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return path
