"""Representability by weighted majorities, the saturation fixpoint of a
hypothesis class, and the finite-scale tools around it: k-realizability,
majority votes of p-sequences, the minimax game value, and de-virtualization
of trees and half-graphs back to earlier levels."""

from __future__ import annotations

import os
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from math import comb

from .core import (
    HYP, POINT, CapExceeded, HalfGraph, HypothesisClass, SatlabError, SaturationTrace, SpecialTree, WeightedSet,
    bits_to_mask, class_from_masks, mask_to_bits, tree_nodes,
)
from .exactlp import OPTIMAL, LinearProgram, max_slack, solve

DEFAULT_DOMAIN_CAP = 16
DEFAULT_MAJ_CAP = 200_000


def domain_cap() -> int:
    """Enumeration cap on the evaluation-domain size; SATLAB_CAP overrides it."""
    raw = os.environ.get("SATLAB_CAP")
    if raw:
        try:
            return int(raw)
        except ValueError as exc:
            raise SatlabError(f"SATLAB_CAP must be an integer, got {raw!r}") from exc
    return DEFAULT_DOMAIN_CAP


def realizability_order(eps) -> int:
    """floor(1/eps): every representable function is this-realizable."""
    eps = Fraction(eps)
    if eps <= 0:
        raise SatlabError("eps must be positive")
    return int(1 / eps)


def has_small_transversal(sets, budget: int) -> bool:
    """Is there a set of at most ``budget`` points meeting every bitmask in ``sets``?"""
    if not sets:
        return True
    if budget <= 0:
        return False
    smallest = min(sets, key=lambda s: bin(s).count("1"))
    if smallest == 0:
        return False
    for p in _bits(smallest):
        bit = 1 << p
        rest = [s for s in sets if not s & bit]
        if has_small_transversal(rest, budget - 1):
            return True
    return False


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def enumerate_representable(columns, n: int, eps, cap: int | None = None) -> dict:
    """All functions on ``n`` points that a weighted eps-good set of members represents.

    ``columns[i]`` is the label bitmask of member i. Candidates are built
    coordinate by coordinate; a partial candidate is dropped as soon as some
    set of at most floor(1/eps) assigned points is matched by no member, which
    the union bound rules out for representable functions. Survivors are
    decided exactly by the slack program. Returns ``{mask: WeightedSet}``;
    members themselves get singleton witnesses.
    """
    eps = Fraction(eps)
    cap = domain_cap() if cap is None else cap
    if n > cap:
        raise CapExceeded(f"evaluation domain of size {n} exceeds the enumeration cap {cap}")
    if not columns:
        return {}
    k = realizability_order(eps)
    first_index = {}
    for i, c in enumerate(columns):
        first_index.setdefault(c, i)
    found = {}
    m = len(columns)

    def leaf(f: int):
        if f in first_index:
            found[f] = WeightedSet.singleton(first_index[f])
            return
        rows = [[i for i, c in enumerate(columns) if ((c ^ f) >> x) & 1] for x in range(n)]
        slack, ws = max_slack(rows, eps, m)
        if ws is not None:
            found[f] = ws

    def dfs(j: int, f: int, disagree: list):
        if j == n:
            leaf(f)
            return
        bit = 1 << j
        for value in (0, 1):
            g = f | (bit if value else 0)
            same, new_dis = [], []
            for c, d in zip(columns, disagree):
                if ((c >> j) & 1) == value:
                    same.append(d)
                    new_dis.append(d)
                else:
                    new_dis.append(d | bit)
            if not same:
                continue
            if has_small_transversal(same, k - 1):
                continue
            dfs(j + 1, g, new_dis)

    dfs(0, 0, [0] * m)
    return found


def representable(cls: HypothesisClass, f, eps) -> WeightedSet | None:
    """A weighted eps-good set of hypotheses whose majority is ``f``, or None."""
    eps = Fraction(eps)
    f = tuple(f)
    if len(f) != cls.n_points:
        raise SatlabError("function length does not match the class domain")
    if not len(cls):
        return None
    if f in cls:
        return WeightedSet.singleton(cls.index_of[f])
    fm = bits_to_mask(f)
    rows = [[i for i, c in enumerate(cls.masks) if ((c ^ fm) >> x) & 1] for x in range(cls.n_points)]
    _, ws = max_slack(rows, eps, len(cls))
    return ws


def representable_table(cls: HypothesisClass, eps, cap: int | None = None) -> dict:
    """``{function: witness}`` for every function representable at eps (class members included)."""
    table = enumerate_representable(cls.masks, cls.n_points, eps, cap)
    return {mask_to_bits(f, cls.n_points): ws for f, ws in table.items()}


def representable_functions(cls: HypothesisClass, eps, cap: int | None = None) -> frozenset:
    return frozenset(representable_table(cls, eps, cap))


def saturation_step(cls: HypothesisClass, eps, cap: int | None = None) -> HypothesisClass:
    table = enumerate_representable(cls.masks, cls.n_points, eps, cap)
    return class_from_masks(cls.domain, set(cls.masks) | set(table))


def saturate(cls: HypothesisClass, eps, max_levels: int = 64, cap: int | None = None) -> SaturationTrace:
    """Iterate saturation steps, recording one witness per added function.

    On reaching a fixpoint the final level is repeated once, so the last two
    levels are equal. If ``max_levels`` steps pass first, the trace is
    returned with ``reached_fixpoint`` False.
    """
    eps = Fraction(eps)
    if max_levels < 1:
        raise SatlabError("max_levels must be at least 1")
    levels = [cls]
    provenance = {}
    for n in range(max_levels):
        current = levels[-1]
        table = enumerate_representable(current.masks, current.n_points, eps, cap)
        added = [f for f in table if f not in current.mask_set]
        nxt = class_from_masks(current.domain, set(current.masks) | set(added))
        for f in added:
            provenance[mask_to_bits(f, current.n_points)] = (n, table[f])
        levels.append(nxt)
        if not added:
            return SaturationTrace(eps, tuple(levels), provenance, True)
    return SaturationTrace(eps, tuple(levels), provenance, False)


def is_saturated(cls: HypothesisClass, eps, cap: int | None = None) -> bool:
    table = enumerate_representable(cls.masks, cls.n_points, eps, cap)
    return all(f in cls.mask_set for f in table)


def k_realizable(cls: HypothesisClass, f, k: int) -> bool:
    """Every restriction of ``f`` to at most ``k`` points agrees with some hypothesis."""
    if k < 1:
        raise SatlabError("k must be at least 1")
    f = tuple(f)
    n = cls.n_points
    if not len(cls):
        return n == 0
    size = min(k, n)
    fm = bits_to_mask(f)
    diffs = [c ^ fm for c in cls.masks]
    for subset in combinations(range(n), size):
        smask = sum(1 << x for x in subset)
        if not any(d & smask == 0 for d in diffs):
            return False
    return True


def maj_p(cls: HypothesisClass, p: int, cap: int = DEFAULT_MAJ_CAP) -> HypothesisClass:
    """All counting-majority functions of length-p sequences from the class."""
    if p < 1 or p % 2 == 0:
        raise SatlabError("p must be a positive odd integer")
    if not len(cls):
        return cls
    count = comb(len(cls) + p - 1, p)
    if count > cap:
        raise CapExceeded(f"{count} multisets exceed the majority-vote cap {cap}")
    n = cls.n_points
    out = set()
    half = p // 2
    for multiset in combinations_with_replacement(cls.masks, p):
        f = 0
        for x in range(n):
            if sum((c >> x) & 1 for c in multiset) > half:
                f |= 1 << x
        out.add(f)
    return class_from_masks(cls.domain, out)


def game_value(cls: HypothesisClass, g) -> Fraction:
    """Value of the zero-sum game between point distributions and hypotheses.

    Solved from the point player's side: maximise v subject to every
    hypothesis having weighted disagreement with ``g`` of at least v.
    By LP duality this equals the best worst-case disagreement of a
    hypothesis mixture.
    """
    if not len(cls):
        raise SatlabError("game value needs a nonempty class")
    g = tuple(g)
    n = cls.n_points
    if len(g) != n:
        raise SatlabError("function length does not match the class domain")
    if n == 0:
        return Fraction(0)
    constraints = [([1] * n + [0], "=", 1)]
    for h in cls.hypotheses:
        constraints.append(([-int(h[x] != g[x]) for x in range(n)] + [1], "<=", 0))
    lp = LinearProgram.build(n + 1, constraints, [0] * n + [1], free={n})
    out = solve(lp)
    if out.status != OPTIMAL:
        raise SatlabError(f"game program unexpectedly {out.status}")
    return out.value


# -------------------------------------------------------- de-virtualization

def _level_of(trace: SaturationTrace, f) -> int:
    return trace.first_level(f)


def _witness(trace: SaturationTrace, f, level: int):
    """Witness over ``levels[level]`` for a function first added at level + 1."""
    got = trace.provenance.get(tuple(f))
    if got is None:
        raise SatlabError(f"no provenance for {f!r}")
    src, ws = got
    if src != level:
        raise SatlabError(f"function {f!r} was added from level {src}, not {level}")
    return ws


def _choose_member(trace, f, level, checks, avoid=()):
    """Lowest-index witness member agreeing with ``f`` on every point in ``checks``.

    Preference goes to members whose label is not in ``avoid``.
    """
    ws = _witness(trace, f, level)
    hyps = trace.levels[level].hypotheses
    ok = [hyps[i] for i, _ in ws.members if all(hyps[i][x] == f[x] for x in checks)]
    if not ok:
        raise AssertionError("error sets cover the whole witness; the eps bound was violated")
    preferred = [h for h in ok if (HYP, h) not in avoid]
    return (preferred or ok)[0]


def _needs_lowering(trace, label, level) -> bool:
    if label[0] != HYP:
        return False
    first = _level_of(trace, label[1])
    if first > level + 1:
        raise SatlabError(f"label {label!r} sits more than one level above {level}")
    return first == level + 1


def devirtualize_leaves(trace: SaturationTrace, tree: SpecialTree, level: int) -> SpecialTree:
    """Replace hypothesis leaves from level+1 by members of their witnesses at ``level``.

    Nodes are points. Each replacement agrees with the original leaf on every
    node of its branch, which the bound eps * height <= 1 guarantees.
    """
    eps = trace.epsilon
    if eps * tree.height > 1:
        raise SatlabError("devirtualize_leaves needs eps * height <= 1")
    for _, lab in tree.nodes:
        if lab[0] != POINT:
            raise SatlabError("leaf de-virtualization expects point-labelled nodes")
    new_leaves = {}
    for nu, lab in tree.leaves:
        if not _needs_lowering(trace, lab, level):
            new_leaves[nu] = lab
            continue
        path = [tree.node_map[nu[:i]][1] for i in range(len(nu))]
        new_leaves[nu] = (HYP, _choose_member(trace, lab[1], level, path))
    return SpecialTree.build(tree.height, tree.node_map, new_leaves)


def devirtualize_nodes(trace: SaturationTrace, tree: SpecialTree, level: int) -> SpecialTree:
    """Replace hypothesis nodes from level+1 by witness members at ``level``.

    Leaves are points. Nodes sharing a label share one representative chosen
    against all leaves below any of them, so level-uniform trees stay
    level-uniform. Needs eps * 2^height <= 1.
    """
    eps = trace.epsilon
    if eps * (1 << tree.height) > 1:
        raise SatlabError("devirtualize_nodes needs eps * 2^height <= 1")
    for _, lab in tree.leaves:
        if lab[0] != POINT:
            raise SatlabError("node de-virtualization expects point-labelled leaves")
    groups = {}
    for eta, lab in tree.nodes:
        if _needs_lowering(trace, lab, level):
            groups.setdefault(lab, []).append(eta)
    replacement = {}
    for lab, etas in groups.items():
        below = sorted({tree.leaf_map[nu][1] for eta in etas for nu in tree.leaf_map if nu.startswith(eta)})
        replacement[lab] = (HYP, _choose_member(trace, lab[1], level, below))
    nodes = {eta: replacement.get(lab, lab) for eta, lab in tree.nodes}
    return SpecialTree.build(tree.height, nodes, tree.leaf_map)


def devirtualize_halfgraph(trace: SaturationTrace, hg: HalfGraph, level: int) -> HalfGraph:
    """Lower the hypothesis side of a half-graph by one level; needs eps * length <= 1."""
    eps = trace.epsilon
    if eps * len(hg) > 1:
        raise SatlabError("devirtualize_halfgraph needs eps * length <= 1")

    def lower(side, other):
        if any(lab[0] != POINT for lab in other):
            raise SatlabError("half-graph de-virtualization expects points opposite hypotheses")
        points = [lab[1] for lab in other]
        return tuple(
            (HYP, _choose_member(trace, lab[1], level, points)) if _needs_lowering(trace, lab, level) else lab
            for lab in side
        )

    left_h = all(lab[0] == HYP for lab in hg.left)
    right_h = all(lab[0] == HYP for lab in hg.right)
    if left_h and not right_h:
        return HalfGraph(lower(hg.left, hg.right), hg.right)
    if right_h and not left_h:
        return HalfGraph(hg.left, lower(hg.right, hg.left))
    raise SatlabError("half-graph must have one hypothesis side and one point side")


def tree_label_levels(trace: SaturationTrace, tree: SpecialTree) -> dict:
    """First level of each hypothesis label used in the tree."""
    return {lab: trace.first_level(lab[1]) for _, lab in tree.nodes + tree.leaves if lab[0] == HYP}


def lower_to_base(trace: SaturationTrace, tree: SpecialTree) -> SpecialTree:
    """Repeatedly de-virtualize until every hypothesis label lies in level 0."""
    levels = tree_label_levels(trace, tree)
    top = max(levels.values(), default=0)
    hyp_nodes = any(lab[0] == HYP for _, lab in tree.nodes)
    for level in range(top - 1, -1, -1):
        tree = devirtualize_nodes(trace, tree, level) if hyp_nodes else devirtualize_leaves(trace, tree, level)
    return tree


def is_level_uniform(tree: SpecialTree) -> bool:
    """Nodes at equal depth carry equal labels."""
    by_depth = {}
    for eta in tree_nodes(tree.height):
        by_depth.setdefault(len(eta), set()).add(tree.node_map[eta])
    return all(len(s) == 1 for s in by_depth.values())
