"""Shared value types: exact rationals, label functions, classes, graphs,
weighted sets, special trees, half-graphs and saturation traces.

Label functions are tuples of 0/1 ints indexed by a fixed domain order.
Internally many algorithms use the equivalent integer bitmask, where bit
``i`` holds the value at domain position ``i``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

LabelFunction = tuple  # tuple[int, ...] of 0/1 values

# Element labels used by trees and half-graphs. A label is a tagged tuple:
#   ("x", i)      domain point i of a hypothesis class
#   ("h", bits)   a hypothesis, identified by its function value
#   ("v", name)   a graph vertex, identified by its id
POINT, HYP, VERTEX = "x", "h", "v"


class SatlabError(ValueError):
    """Base error for invalid inputs and violated preconditions."""


class CapExceeded(SatlabError):
    """An enumeration would exceed the configured size cap."""


# ---------------------------------------------------------------- rationals

def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` (or an integer string, int, or Fraction) exactly."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise SatlabError(f"not a rational: {text!r}")
    s = text.strip()
    num, sep, den = s.partition("/")
    try:
        if sep:
            value = Fraction(int(num.strip()), int(den.strip()))
        else:
            value = Fraction(int(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise SatlabError(f"not a rational p/q: {text!r}") from exc
    return value


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


# ------------------------------------------------------------ bit helpers

def bits_to_mask(bits: Sequence[int]) -> int:
    mask = 0
    for i, b in enumerate(bits):
        if b:
            mask |= 1 << i
    return mask


def mask_to_bits(mask: int, n: int) -> LabelFunction:
    return tuple((mask >> i) & 1 for i in range(n))


def iter_bits(mask: int):
    """Yield the positions of set bits in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _check_bit_row(row, n: int, what: str) -> LabelFunction:
    row = tuple(row)
    if len(row) != n:
        raise SatlabError(f"{what} has length {len(row)}, expected {n}")
    for b in row:
        if b not in (0, 1):
            raise SatlabError(f"{what} contains a non 0/1 entry {b!r}")
    return tuple(int(b) for b in row)


# ---------------------------------------------------------- hypothesis class

@dataclass(frozen=True)
class HypothesisClass:
    """A finite domain plus a duplicate-free, sorted tuple of label functions."""

    domain: tuple
    hypotheses: tuple

    def __post_init__(self):
        if len(set(self.domain)) != len(self.domain):
            raise SatlabError("domain identifiers must be distinct")

    @cached_property
    def masks(self) -> tuple:
        return tuple(bits_to_mask(h) for h in self.hypotheses)

    @cached_property
    def index_of(self) -> dict:
        return {h: i for i, h in enumerate(self.hypotheses)}

    @cached_property
    def mask_set(self) -> frozenset:
        return frozenset(self.masks)

    def __len__(self) -> int:
        return len(self.hypotheses)

    def __contains__(self, f) -> bool:
        return tuple(f) in self.index_of

    @property
    def n_points(self) -> int:
        return len(self.domain)

    def to_json(self) -> dict:
        return {"domain": list(self.domain), "hypotheses": [list(h) for h in self.hypotheses]}


def make_class(domain: Iterable, rows: Iterable) -> HypothesisClass:
    """Build a class from raw 0/1 rows; duplicates collapse and order is canonical."""
    domain = tuple(str(d) for d in domain)
    n = len(domain)
    seen = {_check_bit_row(r, n, "hypothesis row") for r in rows}
    return HypothesisClass(domain, tuple(sorted(seen)))


def class_from_masks(domain: Sequence, masks: Iterable[int]) -> HypothesisClass:
    n = len(domain)
    return HypothesisClass(tuple(domain), tuple(sorted({mask_to_bits(m, n) for m in masks})))


def dual(cls: HypothesisClass) -> HypothesisClass:
    """Swap points and hypotheses: each old point becomes the function h -> h(x)."""
    names = tuple(f"h{j}" for j in range(len(cls)))
    rows = [tuple(h[i] for h in cls.hypotheses) for i in range(cls.n_points)]
    return make_class(names, rows)


def realized_relation(cls: HypothesisClass) -> frozenset:
    """The set of (point index, hypothesis) pairs labelled 1, for comparisons."""
    return frozenset((i, h) for h in cls.hypotheses for i in range(cls.n_points) if h[i])


# -------------------------------------------------------------------- graph

@dataclass(frozen=True)
class Graph:
    """A finite symmetric graph. ``rows[i]`` is the adjacency bitmask of vertex i,
    with bit i set exactly when vertex i carries a loop."""

    vertices: tuple
    rows: tuple

    def __post_init__(self):
        n = len(self.vertices)
        if len(set(self.vertices)) != n:
            raise SatlabError("vertex identifiers must be distinct")
        if len(self.rows) != n:
            raise SatlabError("adjacency rows do not match vertex count")
        for i, r in enumerate(self.rows):
            if r >> n:
                raise SatlabError("adjacency row refers to a missing vertex")
            for j in iter_bits(r):
                if not (self.rows[j] >> i) & 1:
                    raise SatlabError("adjacency must be symmetric")

    def __len__(self) -> int:
        return len(self.vertices)

    @cached_property
    def index_of(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    def adjacent(self, i: int, j: int) -> bool:
        return bool((self.rows[i] >> j) & 1)

    def row(self, i: int) -> LabelFunction:
        return mask_to_bits(self.rows[i], len(self.vertices))

    def loops(self) -> tuple:
        return tuple(i for i in range(len(self)) if self.adjacent(i, i))

    def edges(self) -> tuple:
        return tuple((i, j) for i in range(len(self)) for j in iter_bits(self.rows[i]) if i < j)

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [list(e) for e in self.edges()],
            "loops": list(self.loops()),
        }


def make_graph(vertices: Iterable, edges: Iterable = (), loops: Iterable = ()) -> Graph:
    """Build a graph from index pairs; edges are symmetrised, loops explicit."""
    vertices = tuple(str(v) for v in vertices)
    n = len(vertices)
    rows = [0] * n
    for e in edges:
        i, j = tuple(e)
        if not (0 <= i < n and 0 <= j < n):
            raise SatlabError(f"edge {e!r} refers to a missing vertex")
        rows[i] |= 1 << j
        rows[j] |= 1 << i
    for i in loops:
        if not 0 <= i < n:
            raise SatlabError(f"loop {i!r} refers to a missing vertex")
        rows[i] |= 1 << i
    return Graph(vertices, tuple(rows))


def graph_from_rows(vertices: Sequence, rows: Sequence[int]) -> Graph:
    return Graph(tuple(vertices), tuple(rows))


def class_from_graph(graph: Graph) -> HypothesisClass:
    """Neighbourhood rows (loops included) become hypotheses over the vertex set."""
    return class_from_masks(graph.vertices, graph.rows)


# -------------------------------------------------------------- weighted set

@dataclass(frozen=True)
class WeightedSet:
    """Distinct member indices with positive rational weights summing to 1."""

    members: tuple  # tuple of (index, Fraction), sorted by index

    def __post_init__(self):
        idx = [i for i, _ in self.members]
        if len(set(idx)) != len(idx):
            raise SatlabError("weighted set members must be distinct")
        if not self.members:
            raise SatlabError("weighted set must be nonempty")
        total = Fraction(0)
        for _, w in self.members:
            if not isinstance(w, Fraction) or w <= 0:
                raise SatlabError("weights must be positive Fractions")
            total += w
        if total != 1:
            raise SatlabError(f"weights sum to {total}, not 1")

    @classmethod
    def of(cls, pairs) -> "WeightedSet":
        items = sorted((int(i), Fraction(w)) for i, w in dict(pairs).items()) if isinstance(pairs, Mapping) \
            else sorted((int(i), Fraction(w)) for i, w in pairs)
        return cls(tuple(items))

    @classmethod
    def uniform(cls, indices: Iterable[int]) -> "WeightedSet":
        idx = sorted(set(indices))
        if not idx:
            raise SatlabError("uniform weighted set needs at least one member")
        w = Fraction(1, len(idx))
        return cls(tuple((i, w) for i in idx))

    @classmethod
    def singleton(cls, index: int) -> "WeightedSet":
        return cls(((int(index), Fraction(1)),))

    @property
    def indices(self) -> tuple:
        return tuple(i for i, _ in self.members)

    def weight(self, index: int) -> Fraction:
        for i, w in self.members:
            if i == index:
                return w
        return Fraction(0)

    def __len__(self) -> int:
        return len(self.members)

    def to_json(self) -> list:
        return [[i, format_rational(w)] for i, w in self.members]


# ------------------------------------------------------------ special trees

def tree_nodes(height: int):
    """Binary strings of length < height, in breadth-first order."""
    out = [""]
    for s in out:
        if len(s) + 1 < height:
            out.extend((s + "0", s + "1"))
    return tuple(out) if height > 0 else ()


def tree_leaves(height: int):
    out = [""]
    for _ in range(height):
        out = [s + b for s in out for b in "01"]
    return tuple(out)


@dataclass(frozen=True)
class SpecialTree:
    """Nodes keyed by binary strings of length < height, leaves by strings of
    length == height. Labels are tagged tuples (see module docstring)."""

    height: int
    nodes: tuple  # tuple of (eta, label) sorted by eta order
    leaves: tuple  # tuple of (nu, label)

    @classmethod
    def build(cls, height: int, nodes: Mapping, leaves: Mapping) -> "SpecialTree":
        want_nodes, want_leaves = tree_nodes(height), tree_leaves(height)
        if set(nodes) != set(want_nodes) or set(leaves) != set(want_leaves):
            raise SatlabError("tree node/leaf index sets do not match the height")
        return cls(height, tuple((e, nodes[e]) for e in want_nodes), tuple((v, leaves[v]) for v in want_leaves))

    @cached_property
    def node_map(self) -> dict:
        return dict(self.nodes)

    @cached_property
    def leaf_map(self) -> dict:
        return dict(self.leaves)

    def relabel(self, node_fn=None, leaf_fn=None) -> "SpecialTree":
        nodes = {e: (node_fn(e, lab) if node_fn else lab) for e, lab in self.nodes}
        leaves = {v: (leaf_fn(v, lab) if leaf_fn else lab) for v, lab in self.leaves}
        return SpecialTree.build(self.height, nodes, leaves)

    def to_json(self) -> dict:
        return {
            "height": self.height,
            "nodes": {e: label_to_json(l) for e, l in self.nodes},
            "leaves": {v: label_to_json(l) for v, l in self.leaves},
        }


@dataclass(frozen=True)
class HalfGraph:
    """Left sequence a_1..a_k and right sequence b_1..b_k with a_i ~ b_j iff i < j."""

    left: tuple
    right: tuple

    def __post_init__(self):
        if len(self.left) != len(self.right):
            raise SatlabError("half-graph sides must have equal length")

    def __len__(self) -> int:
        return len(self.left)

    def to_json(self) -> dict:
        return {"left": [label_to_json(l) for l in self.left], "right": [label_to_json(l) for l in self.right]}


def label_to_json(label):
    tag, value = label
    if tag == HYP:
        return [tag, "".join(str(b) for b in value)]
    return [tag, value]


# ------------------------------------------------------------------- hosts

class ClassHost:
    """Relation view of a class: a point and a hypothesis are related iff h(x) = 1."""

    def __init__(self, cls: HypothesisClass):
        self.cls = cls

    def related(self, p, q) -> bool:
        if p[0] == POINT and q[0] == HYP:
            return bool(q[1][p[1]])
        if p[0] == HYP and q[0] == POINT:
            return bool(p[1][q[1]])
        raise SatlabError(f"labels {p!r}, {q!r} are not a point/hypothesis pair")

    def contains(self, label) -> bool:
        if label[0] == POINT:
            return 0 <= label[1] < self.cls.n_points
        if label[0] == HYP:
            return label[1] in self.cls
        return False


class GraphHost:
    """Relation view of a graph: adjacency, loops included."""

    def __init__(self, graph: Graph):
        self.graph = graph

    def related(self, p, q) -> bool:
        if p[0] != VERTEX or q[0] != VERTEX:
            raise SatlabError("graph hosts relate vertex labels only")
        g = self.graph
        return g.adjacent(g.index_of[p[1]], g.index_of[q[1]])

    def contains(self, label) -> bool:
        return label[0] == VERTEX and label[1] in self.graph.index_of


class RuleHost:
    """A host whose relation is given by a callable; used for large synthetic trees."""

    def __init__(self, rule, members=None):
        self.rule = rule
        self.members = members

    def related(self, p, q) -> bool:
        return bool(self.rule(p, q))

    def contains(self, label) -> bool:
        return self.members is None or label in self.members


def tree_violations(tree: SpecialTree, host) -> list:
    """Independent checker for the special-tree pattern; returns problems found."""
    problems = []
    node_labels = {lab for _, lab in tree.nodes}
    leaf_labels = [lab for _, lab in tree.leaves]
    for lab in list(node_labels) + leaf_labels:
        if not host.contains(lab):
            problems.append(f"label {lab!r} not in host")
    if node_labels & set(leaf_labels):
        problems.append("node and leaf labels are not disjoint")
    if len(set(leaf_labels)) != len(leaf_labels):
        problems.append("leaf labels repeat")
    for nu, leaf in tree.leaves:
        for k in range(len(nu)):
            eta = nu[:k]
            want = nu[k] == "1"
            if host.related(tree.node_map[eta], leaf) != want:
                problems.append(f"node {eta!r} vs leaf {nu!r}: expected {'related' if want else 'unrelated'}")
    return problems


def halfgraph_violations(hg: HalfGraph, host) -> list:
    problems = []
    for lab in hg.left + hg.right:
        if not host.contains(lab):
            problems.append(f"label {lab!r} not in host")
    if set(hg.left) & set(hg.right):
        problems.append("left and right sides are not disjoint")
    if len(set(hg.left)) != len(hg.left) or len(set(hg.right)) != len(hg.right):
        problems.append("repeated element on one side")
    for i, a in enumerate(hg.left):
        for j, b in enumerate(hg.right):
            if host.related(a, b) != (i < j):
                problems.append(f"a_{i + 1} vs b_{j + 1}: expected {'related' if i < j else 'unrelated'}")
    return problems


# ---------------------------------------------------------------- traces

@dataclass(frozen=True)
class SaturationTrace:
    """Levels H_0, H_1, ... and one witness per added function.

    ``provenance[f]`` is ``(n, ws)``: f first appears at level n+1 and ``ws``
    is a weighted set over ``levels[n].hypotheses`` whose majority is f.
    """

    epsilon: Fraction
    levels: tuple
    provenance: dict = field(default_factory=dict)
    reached_fixpoint: bool = False

    def first_level(self, f) -> int:
        f = tuple(f)
        for n, level in enumerate(self.levels):
            if f in level:
                return n
        raise SatlabError(f"function {f!r} does not occur in the trace")

    @property
    def final(self) -> HypothesisClass:
        return self.levels[-1]

    def to_json(self) -> dict:
        out_levels = []
        for n, level in enumerate(self.levels):
            added = []
            if n > 0:
                prev = self.levels[n - 1]
                for h in level.hypotheses:
                    if h not in prev:
                        src, ws = self.provenance[h]
                        added.append({
                            "function": list(h),
                            "witness": [[list(self.levels[src].hypotheses[i]), format_rational(w)]
                                        for i, w in ws.members],
                        })
            out_levels.append({"level": n, "size": len(level), "hypotheses": [list(h) for h in level.hypotheses],
                               "added": added})
        return {
            "kind": "class-trace",
            "epsilon": format_rational(self.epsilon),
            "domain": list(self.levels[0].domain),
            "reached_fixpoint": self.reached_fixpoint,
            "levels": out_levels,
        }


@dataclass(frozen=True, order=True)
class Signature:
    """Opinions of a candidate vertex on the current vertices and on the good-opinion table."""

    on_vertices: tuple
    on_good: tuple

    def to_json(self) -> dict:
        return {"on_vertices": "".join(map(str, self.on_vertices)), "on_good": "".join(map(str, self.on_good))}


@dataclass(frozen=True)
class GraphSaturationTrace:
    """Graph levels G_0, G_1, ...; per added vertex its signature and witness.

    ``signatures[v]`` and ``witnesses[v]`` refer to the level where v was
    added: the witness indexes ``levels[n].vertices`` with v new in level n+1.
    ``t_good[n]`` is the sorted good-opinion table of ``levels[n]``.
    """

    epsilon: Fraction
    levels: tuple
    signatures: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    t_good: tuple = ()
    reached_fixpoint: bool = False

    def first_level(self, vertex_id) -> int:
        for n, level in enumerate(self.levels):
            if vertex_id in level.index_of:
                return n
        raise SatlabError(f"vertex {vertex_id!r} does not occur in the trace")

    @property
    def final(self) -> Graph:
        return self.levels[-1]

    def to_json(self) -> dict:
        out = []
        for n, g in enumerate(self.levels):
            entry = {"level": n, "graph": g.to_json()}
            if n < len(self.t_good):
                entry["t_good"] = ["".join(map(str, t)) for t in self.t_good[n]]
            if n > 0:
                prev = self.levels[n - 1]
                entry["added"] = [
                    {"vertex": v, "signature": self.signatures[v].to_json(),
                     "witness": [[prev.vertices[i], format_rational(w)] for i, w in self.witnesses[v].members]}
                    for v in g.vertices if v not in prev.index_of
                ]
            out.append(entry)
        return {"kind": "graph-trace", "epsilon": format_rational(self.epsilon),
                "reached_fixpoint": self.reached_fixpoint, "levels": out}


# ------------------------------------------------------------------ files

def load_instance(path):
    """Read a class or graph JSON file; raises SatlabError on malformed input."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SatlabError(f"cannot read {path}: {exc}") from exc
    return instance_from_json(data)


def instance_from_json(data):
    if not isinstance(data, dict):
        raise SatlabError("instance JSON must be an object")
    if "hypotheses" in data:
        if "domain" not in data:
            raise SatlabError("class JSON needs a 'domain' list")
        return make_class(data["domain"], data["hypotheses"])
    if "vertices" in data:
        return make_graph(data["vertices"], data.get("edges", []), data.get("loops", []))
    raise SatlabError("JSON is neither a class (domain/hypotheses) nor a graph (vertices/edges)")
