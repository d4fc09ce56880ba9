"""Graph saturation: the table of good opinion functions, realizable
signatures of excellent weighted sets, saturation steps and fixpoint, type
extension, and de-virtualization of special trees.

A signature describes a candidate new vertex by its opinions on the current
vertices and on every entry of the good-opinion table. Excellence of a
weighted set only depends on the good sets through their opinion functions,
which makes the quantification finite.
"""

from __future__ import annotations

import os
from fractions import Fraction

from .core import (
    VERTEX, CapExceeded, Graph, GraphSaturationTrace, SatlabError, Signature, SpecialTree, WeightedSet, mask_to_bits,
)
from .exactlp import OPTIMAL, LinearProgram, solve
from .satclass import domain_cap, enumerate_representable

DEFAULT_SIGNATURE_CAP = 40


def signature_cap() -> int:
    raw = os.environ.get("SATLAB_CAP")
    if raw:
        try:
            return max(int(raw), DEFAULT_SIGNATURE_CAP)
        except ValueError as exc:
            raise SatlabError(f"SATLAB_CAP must be an integer, got {raw!r}") from exc
    return DEFAULT_SIGNATURE_CAP


def check_graph_eps(eps) -> Fraction:
    """Graph saturation needs 0 < eps < 2 - sqrt(3), tested exactly as (2 - eps)^2 > 3."""
    eps = Fraction(eps)
    if not (0 < eps and (2 - eps) ** 2 > 3):
        raise SatlabError(f"graph saturation needs 0 < eps < 2 - sqrt(3); got {eps}")
    return eps


def good_opinion_table(graph: Graph, eps, cap: int | None = None) -> dict:
    """``{tau: witness}`` for every opinion function of a weighted eps-good vertex set."""
    cap = domain_cap() if cap is None else cap
    table = enumerate_representable(graph.rows, len(graph), eps, cap)
    n = len(graph)
    return {mask_to_bits(f, n): ws for f, ws in table.items()}


def good_opinion_functions(graph: Graph, eps, cap: int | None = None) -> frozenset:
    return frozenset(good_opinion_table(graph, eps, cap))


# ------------------------------------------------------------- signatures

def _signature_program(graph, eps, tau0, fixed, t_good):
    """Slack program for a partial signature.

    Goodness rows are strict (through the slack); excellence rows for the
    opinions fixed so far are non-strict.
    """
    n = len(graph)
    rows = graph.rows
    # the cap on the slack keeps the program bounded when no row involves it
    constraints = [([1] * n + [0], "=", 1), ([0] * n + [1], "<=", eps)]
    for v in range(n):
        bad = [int(((rows[i] >> v) & 1) != tau0[v]) for i in range(n)]
        if any(bad):
            constraints.append((bad + [1], "<=", eps))
    for j, bit in fixed:
        tau = t_good[j]
        minority = [int(tau[i] != bit) for i in range(n)]
        if any(minority):
            constraints.append((minority + [0], "<=", eps))
    lp = LinearProgram.build(n + 1, constraints, [0] * n + [1], free={n})
    out = solve(lp)
    if out.status != OPTIMAL or out.value <= 0:
        return None
    return WeightedSet.of([(i, w) for i, w in enumerate(out.solution[:n]) if w > 0])


def signature_table(graph: Graph, eps, table=None, cap: int | None = None) -> dict:
    """``{Signature: witness}`` for every signature of a weighted eps-excellent set.

    For each good opinion tau0 (the candidate's view of V) the opinions on
    the table entries are fixed one by one; a branch is kept only while the
    combined program stays feasible. When the current witness already
    decides an entry, that branch reuses it without solving.
    """
    eps = Fraction(eps)
    if table is None:
        table = good_opinion_table(graph, eps)
    t_good = sorted(table)
    cap = signature_cap() if cap is None else cap
    if len(graph) + len(t_good) > cap:
        raise CapExceeded(f"|V| + |T_good| = {len(graph) + len(t_good)} exceeds the signature cap {cap}")
    out = {}
    for tau0 in t_good:
        base = _signature_program(graph, eps, tau0, [], t_good)
        if base is None:
            continue

        def extend(j, fixed, ws):
            if j == len(t_good):
                out[Signature(tau0, tuple(b for _, b in fixed))] = ws
                return
            tau = t_good[j]
            mass = sum((w for i, w in ws.members if tau[i]), Fraction(0))
            for bit in (0, 1):
                decided = mass <= eps if bit == 0 else mass >= 1 - eps
                nxt = ws if decided else _signature_program(graph, eps, tau0, fixed + [(j, bit)], t_good)
                if nxt is not None:
                    extend(j + 1, fixed + [(j, bit)], nxt)

        extend(0, [], base)
    return out


def excellent_signatures(graph: Graph, eps, cap: int | None = None) -> frozenset:
    return frozenset(signature_table(graph, eps, cap=cap))


def vertex_signature(graph: Graph, v: int, t_good) -> Signature:
    """Signature of the singleton {v}: its row, and each table entry's value at v."""
    return Signature(graph.row(v), tuple(tau[v] for tau in t_good))


# -------------------------------------------------------------- saturation

def _step(graph: Graph, eps, level: int):
    table = good_opinion_table(graph, eps)
    t_good = sorted(table)
    sigs = signature_table(graph, eps, table)
    existing = {vertex_signature(graph, v, t_good) for v in range(len(graph))}
    new = sorted(s for s in sigs if s not in existing)
    index = {tau: j for j, tau in enumerate(t_good)}
    n = len(graph)
    total = n + len(new)
    rows = list(graph.rows) + [0] * len(new)
    ids = list(graph.vertices)
    for k, s in enumerate(new):
        name = f"s{level + 1}_{k}"
        while name in graph.index_of:
            name = "_" + name
        ids.append(name)
    for k, s in enumerate(new):
        a = n + k
        for v in range(n):
            if s.on_vertices[v]:
                rows[a] |= 1 << v
                rows[v] |= 1 << a
        for k2 in range(k, len(new)):
            s2 = new[k2]
            forward = s2.on_good[index[s.on_vertices]]
            backward = s.on_good[index[s2.on_vertices]]
            if forward != backward:
                raise SatlabError(
                    f"pair opinions disagree between new vertices {ids[a]} and {ids[n + k2]}; eps too large?"
                )
            if forward:
                b = n + k2
                rows[a] |= 1 << b
                rows[b] |= 1 << a
    assert all(r >> total == 0 for r in rows)
    new_graph = Graph(tuple(ids), tuple(rows))
    added = [(ids[n + k], s, sigs[s]) for k, s in enumerate(new)]
    return new_graph, added, tuple(t_good)


def graph_saturation_step(graph: Graph, eps) -> Graph:
    """Add one vertex per realizable signature not already carried by a vertex."""
    eps = check_graph_eps(eps)
    return _step(graph, eps, 0)[0]


def graph_saturate(graph: Graph, eps, max_levels: int = 16) -> GraphSaturationTrace:
    eps = check_graph_eps(eps)
    if max_levels < 1:
        raise SatlabError("max_levels must be at least 1")
    levels, t_goods = [graph], []
    signatures, witnesses = {}, {}
    for n in range(max_levels):
        nxt, added, t_good = _step(levels[-1], eps, n)
        t_goods.append(t_good)
        for vid, sig, ws in added:
            signatures[vid] = sig
            witnesses[vid] = ws
        levels.append(nxt)
        if not added:
            t_goods.append(t_good)
            return GraphSaturationTrace(eps, tuple(levels), signatures, witnesses, tuple(t_goods), True)
    return GraphSaturationTrace(eps, tuple(levels), signatures, witnesses, tuple(t_goods), False)


def graph_is_saturated(graph: Graph, eps) -> bool:
    eps = check_graph_eps(eps)
    table = good_opinion_table(graph, eps)
    t_good = sorted(table)
    existing = {vertex_signature(graph, v, t_good) for v in range(len(graph))}
    return all(s in existing for s in signature_table(graph, eps, table))


def extend_partial_type(graph: Graph, eps, on_vertices=None, on_good=None) -> Signature:
    """Greedily complete a partial signature, preferring label 1 at each step.

    ``on_vertices`` maps vertex indices and ``on_good`` maps table entries to
    0/1. Vertices are completed first, then table entries, each time keeping
    the assignment extendable to a realizable signature.
    """
    eps = check_graph_eps(eps)
    table = good_opinion_table(graph, eps)
    t_good = sorted(table)
    index = {tau: j for j, tau in enumerate(t_good)}
    sigs = list(signature_table(graph, eps, table))
    fixed_v = dict(on_vertices or {})
    fixed_t = {}
    for tau, bit in (on_good or {}).items():
        tau = tuple(tau)
        if tau not in index:
            raise SatlabError(f"{tau!r} is not a good opinion function")
        fixed_t[index[tau]] = bit

    def consistent(s):
        return all(s.on_vertices[v] == b for v, b in fixed_v.items()) and all(
            s.on_good[j] == b for j, b in fixed_t.items()
        )

    pool = [s for s in sigs if consistent(s)]
    if not pool:
        raise SatlabError("partial assignment is not realized by any excellent set")
    for v in range(len(graph)):
        if v not in fixed_v:
            ones = [s for s in pool if s.on_vertices[v] == 1]
            fixed_v[v] = 1 if ones else 0
            pool = ones or pool
    for j in range(len(t_good)):
        if j not in fixed_t:
            ones = [s for s in pool if s.on_good[j] == 1]
            fixed_t[j] = 1 if ones else 0
            pool = ones or pool
    return Signature(
        tuple(fixed_v[v] for v in range(len(graph))), tuple(fixed_t[j] for j in range(len(t_good)))
    )


# -------------------------------------------------------- de-virtualization

def graph_devirtualize_tree(trace: GraphSaturationTrace, tree: SpecialTree, level: int) -> SpecialTree:
    """Move a special tree of ``levels[level + 1]`` into ``levels[level]``.

    Leaves that are new vertices are replaced first, by witness members
    whose adjacency to every node on the branch matches the new vertex.
    New nodes are then replaced by witness members that match every leaf
    below them. Needs eps < 1/2^height and height >= 2.
    """
    eps = trace.epsilon
    h = tree.height
    if h < 2:
        raise SatlabError("graph de-virtualization needs height >= 2")
    if not eps < Fraction(1, 1 << h):
        raise SatlabError("graph de-virtualization needs eps < 1/2^height")
    if level + 1 >= len(trace.levels):
        raise SatlabError("trace has no level above the requested one")
    big, small = trace.levels[level + 1], trace.levels[level]
    for _, lab in tree.nodes + tree.leaves:
        if lab[0] != VERTEX or lab[1] not in big.index_of:
            raise SatlabError(f"label {lab!r} is not a vertex of level {level + 1}")

    def idx(lab):
        return big.index_of[lab[1]]

    def is_new(lab):
        return lab[1] not in small.index_of

    def witness(lab):
        ws = trace.witnesses.get(lab[1])
        if ws is None or trace.first_level(lab[1]) != level + 1:
            raise SatlabError(f"no witness at level {level} for {lab[1]!r}")
        return ws

    node_labels = {lab for _, lab in tree.nodes}
    used_leaves = set()
    leaves = {}
    for nu, lab in tree.leaves:
        if not is_new(lab):
            leaves[nu] = lab
            used_leaves.add(lab)
            continue
        path = [tree.node_map[nu[:i]] for i in range(h)]
        ok = []
        for u, _ in witness(lab).members:
            cand = (VERTEX, small.vertices[u])
            ui = big.index_of[cand[1]]
            if all(big.adjacent(ui, idx(a)) == big.adjacent(idx(lab), idx(a)) for a in path):
                ok.append(cand)
        if not ok:
            raise AssertionError("leaf error sets cover the witness")
        preferred = [c for c in ok if c not in node_labels and c not in used_leaves]
        leaves[nu] = (preferred or ok)[0]
        used_leaves.add(leaves[nu])

    nodes = {}
    for eta, lab in tree.nodes:
        if not is_new(lab):
            nodes[eta] = lab
            continue
        below = [leaves[nu] for nu in leaves if nu.startswith(eta)]
        ok = []
        for u, _ in witness(lab).members:
            cand = (VERTEX, small.vertices[u])
            ui = big.index_of[cand[1]]
            if all(big.adjacent(ui, idx(b)) == big.adjacent(idx(lab), idx(b)) for b in below):
                ok.append(cand)
        if not ok:
            raise AssertionError("node error sets cover the witness")
        preferred = [c for c in ok if c not in used_leaves]
        nodes[eta] = (preferred or ok)[0]
    return SpecialTree.build(h, nodes, leaves)
