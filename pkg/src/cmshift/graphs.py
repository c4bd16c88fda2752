"""Graph presentations of countable Markov shifts.

Two presentations are supported:

* `FiniteGraph`: symbols 1..S with an explicit edge set (multiplicities
  allowed internally; JSON documents are simple).
* `LoopSystem`: a distinguished base vertex with `a_l` first-return loops of
  each length `l`, given by an explicit list plus an optional infinite tail
  rule. Loops of length l >= 2 have l-1 interior vertices of their own; loops
  of length 1 are parallel self-edges at the base. Parallel loops make the
  presentation a multigraph, and every count downstream is a walk count
  (equal to the cylinder count whenever the presentation is simple).

The canonical enumeration gives the base vertex id 1 and numbers loop
interiors consecutively, loops ordered by (length, explicit-before-tail,
insertion order). Truncating at q keeps the induced subgraph on ids <= q.
"""

import json
import math
from bisect import bisect_right
from dataclasses import dataclass

from .errors import CapacityError, SchemaError, TruncationInsufficient, ValidationError


# ---------------------------------------------------------------------------
# tails


@dataclass(frozen=True)
class GeometricTail:
    """a_l = floor(coeff * growth**l) for l >= from_length."""

    from_length: int
    coeff: float
    growth: float

    def __post_init__(self):
        if self.from_length < 1:
            raise ValidationError("from_length must be >= 1")
        if not (self.coeff >= 0) or not math.isfinite(self.coeff):
            raise ValidationError("coeff must be a finite number >= 0")
        if not (self.growth >= 1) or not math.isfinite(self.growth):
            raise ValidationError("growth must be a finite number >= 1")

    def multiplicity(self, length):
        if length < self.from_length:
            return 0
        if float(self.growth).is_integer() and float(self.coeff).is_integer():
            return int(self.coeff) * int(self.growth) ** length
        try:
            return int(math.floor(self.coeff * self.growth ** length))
        except OverflowError:
            # beyond float range; exact floors need integral parameters
            num, den = self.coeff.as_integer_ratio()
            gn, gd = self.growth.as_integer_ratio()
            return num * gn ** length // (den * gd ** length)

    @property
    def effective(self):
        """True when the tail contributes infinitely many loops."""
        if self.growth > 1:
            return self.coeff > 0
        return self.coeff >= 1

    def upper_sum(self, beyond, x):
        """Certified upper bound for sum_{l > beyond} a_l x**l, for 0 < x < 1/growth."""
        y = self.growth * x
        if y >= 1:
            return math.inf
        start = max(beyond + 1, self.from_length)
        return self.coeff * y ** start / (1 - y)


@dataclass(frozen=True)
class FormulaTail:
    """Multiplicities from a callable, with declared analytic data.

    `growth` declares limsup (1/l) log a_l = log(growth), so the loop
    generating function has radius exactly 1/growth. `upper_sum(beyond, x)`
    must return a certified upper bound for sum_{l > beyond} a_l x**l valid
    for 0 < x <= 1/growth. `series_at_radius` / `mean_diverges` carry exact
    knowledge about the behaviour at the radius when the construction
    certifies it; None means unknown.
    """

    fn: callable
    growth: float
    upper_sum: callable = None
    series_at_radius: float = None
    mean_diverges: bool = None
    label: str = "formula"

    def multiplicity(self, length):
        return int(self.fn(length))

    @property
    def from_length(self):
        return 1

    @property
    def effective(self):
        return True


# ---------------------------------------------------------------------------
# finite graphs


class FiniteGraph:
    """Directed graph on symbols 1..symbols, with edge multiplicities."""

    def __init__(self, symbols, edges):
        if not isinstance(symbols, int) or symbols < 1:
            raise ValidationError("symbols must be a positive integer")
        self.symbols = symbols
        mult = {}
        items = edges.items() if isinstance(edges, dict) else ((e, 1) for e in edges)
        for (i, j), m in items:
            if not (1 <= i <= symbols and 1 <= j <= symbols):
                raise ValidationError(f"edge ({i},{j}) out of range 1..{symbols}")
            if m < 1:
                raise ValidationError(f"edge ({i},{j}) has multiplicity {m}")
            mult[(i, j)] = mult.get((i, j), 0) + m
        self._mult = mult
        self._out = {v: [] for v in range(1, symbols + 1)}
        self._in = {v: [] for v in range(1, symbols + 1)}
        for (i, j) in mult:
            self._out[i].append(j)
            self._in[j].append(i)
        for v in self._out:
            self._out[v].sort()
            self._in[v].sort()

    def is_edge(self, i, j):
        return (i, j) in self._mult

    def multiplicity_of(self, i, j):
        return self._mult.get((i, j), 0)

    def out_neighbors(self, v):
        return list(self._out.get(v, ()))

    def in_neighbors(self, v):
        return list(self._in.get(v, ()))

    def edge_multiplicities(self):
        return dict(self._mult)

    @property
    def is_simple(self):
        return all(m == 1 for m in self._mult.values())

    @property
    def edge_count(self):
        return sum(self._mult.values())

    def truncate(self, q):
        size = min(q, self.symbols)
        if size < 1:
            raise ValidationError("truncation needs q >= 1")
        mult = {e: m for e, m in self._mult.items() if e[0] <= size and e[1] <= size}
        return Truncation(self, size, FiniteGraph(size, mult))

    def __repr__(self):
        return f"FiniteGraph(symbols={self.symbols}, edges={len(self._mult)})"


# ---------------------------------------------------------------------------
# loop systems


@dataclass(frozen=True)
class LoopRef:
    """Identity of a single loop: its length and rank among that length."""

    length: int
    ordinal: int


class Enumeration:
    """Materialized prefix of the canonical vertex numbering of a LoopSystem.

    Covers every interior id <= max_id (and the whole loop containing each
    such id). Rows are (length, ordinal, first_interior_id) in id order.
    """

    def __init__(self, system, max_id):
        self.system = system
        self.max_id = max_id
        rows = []
        next_id = 2
        per_length = {}
        length = 2
        limit = system.max_loop_length()
        while next_id <= max_id:
            if limit is not None and length > limit:
                break
            a = system.multiplicity(length)
            taken = 0
            while taken < a and next_id <= max_id:
                rows.append((length, taken, next_id))
                next_id += length - 1
                taken += 1
            if taken:
                per_length[length] = taken
            length += 1
        self.rows = rows
        self.per_length = per_length
        self.next_free_id = next_id
        self._firsts = [r[2] for r in rows]

    def _row_for(self, vid):
        k = bisect_right(self._firsts, vid) - 1
        if k < 0:
            raise ValidationError(f"id {vid} is not an interior vertex")
        length, ordinal, first = self.rows[k]
        if vid > first + length - 2:
            raise ValidationError(f"id {vid} is beyond the materialized enumeration")
        return length, ordinal, first

    def locate(self, vid):
        """(loop length, position 1..length-1) of an interior id."""
        length, _, first = self._row_for(vid)
        return length, vid - first + 1

    def loop_of(self, vid):
        length, ordinal, _ = self._row_for(vid)
        return LoopRef(length, ordinal)

    def materialized_count(self, length):
        return self.per_length.get(length, 0)


class LoopSystem:
    """Loops at a common base vertex: explicit list plus optional tail rule."""

    def __init__(self, loops, tail=None):
        loops = [(int(l), int(m)) for l, m in loops]
        for l, m in loops:
            if l < 1:
                raise ValidationError(f"loop length {l} must be >= 1")
            if m < 0:
                raise ValidationError(f"loop multiplicity {m} must be >= 0")
        self.loops = tuple(loops)
        self.tail = tail
        self._explicit = {}
        for l, m in loops:
            self._explicit[l] = self._explicit.get(l, 0) + m
        if not self.is_infinite and not any(m > 0 for m in self._explicit.values()):
            raise ValidationError("loop system needs at least one loop")

    @property
    def symbols(self):
        return None  # countably infinite

    @property
    def is_infinite(self):
        return self.tail is not None and self.tail.effective

    def multiplicity(self, length):
        a = self._explicit.get(length, 0)
        if self.tail is not None:
            a += self.tail.multiplicity(length)
        return a

    def explicit_multiplicity(self, length):
        return self._explicit.get(length, 0)

    def max_loop_length(self):
        """Largest loop length, or None when the tail is infinite."""
        if self.is_infinite:
            return None
        best = max((l for l, m in self._explicit.items() if m > 0), default=0)
        if self.tail is not None and not self.tail.effective:
            # a vanishing tail contributes nothing
            pass
        return best

    def enumeration(self, max_id):
        return Enumeration(self, max_id)

    def truncate(self, q):
        if q < 1:
            raise ValidationError("truncation needs q >= 1")
        enum = self.enumeration(q)
        mult = {}
        a1 = self.multiplicity(1)
        if a1:
            mult[(1, 1)] = a1
        for length, _, first in enum.rows:
            last = first + length - 2
            if first <= q:
                mult[(1, first)] = 1
            for vid in range(first, min(last, q)):
                if vid + 1 <= q:
                    mult[(vid, vid + 1)] = 1
            if last <= q:
                mult[(last, 1)] = 1
        size = min(q, enum.next_free_id - 1)
        return Truncation(self, size, FiniteGraph(max(size, 1), mult))

    def __repr__(self):
        tail = type(self.tail).__name__ if self.tail is not None else None
        return f"LoopSystem(loops={list(self.loops)!r}, tail={tail})"


class Truncation:
    """Induced subgraph on the symbols <= q of the canonical enumeration."""

    def __init__(self, ambient, vertex_count, graph):
        self.ambient = ambient
        self.vertex_count = vertex_count
        self._graph = graph

    def as_graph(self):
        return self._graph

    def edge_multiplicities(self):
        return self._graph.edge_multiplicities()


# ---------------------------------------------------------------------------
# walk views: the certified finite substrate for ambient counting

CLASS_STATE = "c"
VERTEX_STATE = "v"


class WalkView:
    """Finite state graph whose walks biject with ambient walks.

    Vertices of tail loops beyond the materialized region are collapsed into
    (length, position) classes with multiplicities: all loops of a given
    length are isomorphic, so walks that only pass through them can be
    counted per class. Valid for walks of at most `n_edges` edges whose
    endpoints (and every marked symbol) are concrete states.
    """

    def __init__(self, states, edges, concrete, meta):
        self.states = states            # list of ("v", id) | ("c", length, pos)
        self.edges = edges              # list of (src_index, dst_index, multiplicity)
        self.concrete = concrete        # id -> state index
        self.meta = meta

    @property
    def state_count(self):
        return len(self.states)

    def state_id(self, index):
        s = self.states[index]
        return s[1] if s[0] == VERTEX_STATE else None


def walk_view(graph, n_edges, cover_id=1, max_states=None):
    """Build a WalkView certified for walks of <= n_edges edges.

    For a loop system, every interior id <= cover_id is materialized as a
    concrete state (whole loops at a time), and the remaining tail loops of
    each length l <= n_edges become one multiplicity-weighted class chain.
    Walks of at most n_edges edges that start and end at concrete states
    cannot use longer loops, so the view counts them exactly.
    """
    if isinstance(graph, FiniteGraph):
        states = [(VERTEX_STATE, v) for v in range(1, graph.symbols + 1)]
        index = {v: i for i, v in enumerate(range(1, graph.symbols + 1))}
        edges = [(index[i], index[j], m) for (i, j), m in graph.edge_multiplicities().items()]
        meta = {"kind": "finite", "certified_edges": n_edges}
        return WalkView(states, edges, index, meta)

    system = graph
    enum = system.enumeration(cover_id)
    limit = system.max_loop_length()
    class_max = n_edges if limit is None else min(n_edges, limit)

    states = [(VERTEX_STATE, 1)]
    concrete = {1: 0}
    edges = []

    def check_budget():
        if max_states is not None and len(states) > max_states:
            raise TruncationInsufficient(
                f"certified view for n_edges={n_edges} needs more than "
                f"{max_states} states"
            )

    a1 = system.multiplicity(1)
    if a1:
        edges.append((0, 0, a1))

    for length, _, first in enum.rows:
        prev = 0
        for pos in range(1, length):
            vid = first + pos - 1
            states.append((VERTEX_STATE, vid))
            idx = len(states) - 1
            concrete[vid] = idx
            edges.append((prev, idx, 1))
            prev = idx
        edges.append((prev, 0, 1))
        check_budget()

    for length in range(2, class_max + 1):
        extra = system.multiplicity(length) - enum.materialized_count(length)
        if extra <= 0:
            continue
        prev = 0
        for pos in range(1, length):
            states.append((CLASS_STATE, length, pos))
            idx = len(states) - 1
            edges.append((prev, idx, extra if pos == 1 else 1))
            prev = idx
        edges.append((prev, 0, 1))
        check_budget()

    meta = {
        "kind": "loop_system",
        "certified_edges": n_edges,
        "materialized_loops": len(enum.rows),
        "class_lengths_to": class_max,
    }
    return WalkView(states, edges, concrete, meta)


# ---------------------------------------------------------------------------
# words and cylinders


def enumerate_words(graph, n, start=None, end=None, cap=1_000_000):
    """All admissible words with n symbols, lexicographic order.

    Requires a simple FiniteGraph: on a multigraph, words and walks are not
    in bijection.
    """
    if not isinstance(graph, FiniteGraph):
        raise ValidationError("enumerate_words needs a finite graph; truncate first")
    if not graph.is_simple:
        raise ValidationError("enumerate_words needs a simple graph (no parallel edges)")
    if n < 1:
        raise ValidationError("word length must be >= 1")
    starts = [start] if start is not None else list(range(1, graph.symbols + 1))
    out = []
    stack = [(v,) for v in reversed(starts) if 1 <= v <= graph.symbols]
    while stack:
        w = stack.pop()
        if len(w) == n:
            if end is None or w[-1] == end:
                out.append(w)
                if len(out) > cap:
                    raise CapacityError(f"more than {cap} words of length {n}")
            continue
        for v in reversed(graph.out_neighbors(w[-1])):
            stack.append(w + (v,))
    return out


def canonical_cylinders(graph, depth, symbol_cap=32):
    """The canonical cylinder enumeration: admissible words over symbols
    <= symbol_cap, breadth-first by length then lexicographic. The k-th
    cylinder in this global order carries weight 2**-(k+1) in the rho metric.
    """
    if isinstance(graph, FiniteGraph):
        size = min(graph.symbols, symbol_cap)
        mult = {e for e in graph.edge_multiplicities() if e[0] <= size and e[1] <= size}
    else:
        trunc = graph.truncate(symbol_cap)
        size = trunc.vertex_count
        mult = set(trunc.edge_multiplicities())
    out = [(v,) for v in range(1, size + 1)]
    layer = out[:]
    for _ in range(depth - 1):
        layer = [w + (v,) for w in layer for v in range(1, size + 1) if (w[-1], v) in mult]
        out.extend(layer)
    return out


# ---------------------------------------------------------------------------
# connectivity helpers


def is_strongly_connected(graph):
    if graph.symbols == 1:
        return graph.is_edge(1, 1) or True
    seen = _reach(graph, 1, graph.out_neighbors)
    if len(seen) != graph.symbols:
        return False
    seen = _reach(graph, 1, graph.in_neighbors)
    return len(seen) == graph.symbols


def _reach(graph, root, step):
    seen = {root}
    stack = [root]
    while stack:
        v = stack.pop()
        for u in step(v):
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


def graph_period(graph):
    """gcd of cycle lengths through vertex 1 (graph assumed strongly connected)."""
    level = {1: 0}
    queue = [1]
    g = 0
    while queue:
        v = queue.pop(0)
        for u in graph.out_neighbors(v):
            if u not in level:
                level[u] = level[v] + 1
                queue.append(u)
            else:
                g = math.gcd(g, level[v] + 1 - level[u])
    return max(g, 1)


# ---------------------------------------------------------------------------
# JSON documents

GRAPH_KINDS = ("finite", "loop_system")


def _require(doc, key, field, kind=dict):
    if key not in doc:
        raise SchemaError(f"missing field {field!r}", field=field)
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise SchemaError(f"field {field!r} has the wrong type", field=field)
    return value


def load_graph(doc):
    """Build a graph from its JSON document form."""
    if not isinstance(doc, dict):
        raise SchemaError("graph document must be an object", field="")
    kind = doc.get("kind")
    if kind not in GRAPH_KINDS:
        raise SchemaError(f"kind must be one of {GRAPH_KINDS}", field="kind")
    if kind == "finite":
        body = _require(doc, "finite", "finite")
        symbols = _require(body, "symbols", "finite.symbols", int)
        if isinstance(symbols, bool) or symbols < 1:
            raise ValidationError("symbols must be >= 1", field="finite.symbols")
        edges = _require(body, "edges", "finite.edges", list)
        seen = set()
        pairs = []
        for k, e in enumerate(edges):
            field = f"finite.edges[{k}]"
            if (
                not isinstance(e, (list, tuple))
                or len(e) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in e)
            ):
                raise SchemaError("edge must be a pair of integers", field=field)
            i, j = e
            if not (1 <= i <= symbols and 1 <= j <= symbols):
                raise ValidationError(f"edge ({i},{j}) out of range", field=field)
            if (i, j) in seen:
                raise ValidationError(f"duplicate edge ({i},{j})", field=field)
            seen.add((i, j))
            pairs.append((i, j))
        if not pairs:
            raise ValidationError("edge list is empty", field="finite.edges")
        return FiniteGraph(symbols, pairs)

    body = _require(doc, "loop_system", "loop_system")
    loops_doc = _require(body, "loops", "loop_system.loops", list)
    loops = []
    for k, item in enumerate(loops_doc):
        base = f"loop_system.loops[{k}]"
        if not isinstance(item, dict):
            raise SchemaError("loop must be an object", field=base)
        length = _require(item, "length", f"{base}.length", int)
        mult = _require(item, "multiplicity", f"{base}.multiplicity", int)
        if length < 1:
            raise ValidationError("length must be >= 1", field=f"{base}.length")
        if mult < 0:
            raise ValidationError("multiplicity must be >= 0", field=f"{base}.multiplicity")
        loops.append((length, mult))
    tail_doc = _require(body, "tail", "loop_system.tail", None)
    tail = None
    if tail_doc is not None:
        if not isinstance(tail_doc, dict):
            raise SchemaError("tail must be null or an object", field="loop_system.tail")
        from_length = _require(tail_doc, "from_length", "loop_system.tail.from_length", int)
        coeff = _require(tail_doc, "coeff", "loop_system.tail.coeff", (int, float))
        growth = _require(tail_doc, "growth", "loop_system.tail.growth", (int, float))
        if from_length < 1:
            raise ValidationError("from_length must be >= 1", field="loop_system.tail.from_length")
        if not (float(coeff) >= 0) or not math.isfinite(float(coeff)):
            raise ValidationError("coeff must be finite and >= 0", field="loop_system.tail.coeff")
        if not (float(growth) >= 1) or not math.isfinite(float(growth)):
            raise ValidationError(
                "growth must be finite and >= 1", field="loop_system.tail.growth"
            )
        tail = GeometricTail(from_length=from_length, coeff=float(coeff), growth=float(growth))
    try:
        system = LoopSystem(loops, tail)
    except ValidationError as exc:
        raise ValidationError(exc.message, field="loop_system.loops") from exc
    return system


def load_graph_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}", field="") from exc
    return load_graph(doc)


def graph_spec(graph):
    """The JSON document form of a graph (inverse of load_graph)."""
    if isinstance(graph, FiniteGraph):
        if not graph.is_simple:
            raise ValidationError("multigraphs have no document form")
        edges = sorted(graph.edge_multiplicities())
        return {
            "kind": "finite",
            "finite": {"symbols": graph.symbols, "edges": [[i, j] for i, j in edges]},
        }
    if isinstance(graph, LoopSystem):
        tail = graph.tail
        if tail is not None and not isinstance(tail, GeometricTail):
            raise ValidationError("formula tails have no document form")
        tail_doc = None
        if tail is not None:
            tail_doc = {
                "from_length": tail.from_length,
                "coeff": tail.coeff,
                "growth": tail.growth,
            }
        return {
            "kind": "loop_system",
            "loop_system": {
                "loops": [{"length": l, "multiplicity": m} for l, m in graph.loops],
                "tail": tail_doc,
            },
        }
    raise ValidationError(f"not a graph: {graph!r}")
