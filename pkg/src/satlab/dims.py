"""VC, Littlestone and threshold dimensions with witnesses, and the constructive
conversions between half-graphs and special trees."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .core import (
    HYP, POINT, HalfGraph, HypothesisClass, SatlabError, SpecialTree, dual, tree_nodes,
)


def _point_columns(cls: HypothesisClass) -> tuple:
    """For each domain point, the bitset of hypothesis indices labelling it 1."""
    cols = [0] * cls.n_points
    for j, h in enumerate(cls.hypotheses):
        for i, b in enumerate(h):
            if b:
                cols[i] |= 1 << j
    return tuple(cols)


# ------------------------------------------------------------------- VC

def vc_dim(cls: HypothesisClass) -> int:
    """Size of the largest shattered subset; -1 for the empty class."""
    if not len(cls):
        return -1
    masks = cls.masks
    n = cls.n_points
    frontier = [0]  # shattered sets of the current size, as point bitmasks
    best = 0
    while frontier:
        nxt = []
        for s in frontier:
            start = s.bit_length()
            for x in range(start, n):
                t = s | (1 << x)
                size = bin(t).count("1")
                if len(cls) < (1 << size):
                    continue
                if len({m & t for m in masks}) == 1 << size:
                    nxt.append(t)
        if nxt:
            best += 1
        frontier = nxt
    return best


# ------------------------------------------------------------ Littlestone

@lru_cache(maxsize=64)
def _ldim_solver(cols: tuple, n_hyp: int):
    memo = {}

    def ldim_of(s: int) -> int:
        if s == 0:
            return -1
        if s & (s - 1) == 0:
            return 0
        got = memo.get(s)
        if got is not None:
            return got
        cap = bin(s).count("1").bit_length() - 1  # floor(log2 |s|)
        best = 0
        for c in cols:
            one, zero = s & c, s & ~c
            if not one or not zero:
                continue
            bound = min(bin(one).count("1").bit_length(), bin(zero).count("1").bit_length())
            if bound <= best:
                continue
            value = 1 + min(ldim_of(one), ldim_of(zero))
            if value > best:
                best = value
                if best == cap:
                    break
        memo[s] = best
        return best

    return ldim_of


def ldim(cls: HypothesisClass) -> int:
    """Littlestone dimension; -1 for the empty class, 0 for a single function."""
    if not len(cls):
        return -1
    cols = _point_columns(cls)
    return _ldim_solver(cols, len(cls))((1 << len(cls)) - 1)


def find_mistake_tree(cls: HypothesisClass, height: int):
    """A shattered mistake tree of the given height, or None if ldim is smaller.

    Nodes are labelled by points, leaves by a hypothesis realizing the branch.
    The lowest-index splitting point is chosen at every node.
    """
    if height < 0:
        raise SatlabError("height must be nonnegative")
    if ldim(cls) < height:
        return None
    cols = _point_columns(cls)
    solver = _ldim_solver(cols, len(cls))
    nodes, leaves = {}, {}

    def build(s: int, eta: str, remaining: int):
        if remaining == 0:
            j = (s & -s).bit_length() - 1
            leaves[eta] = (HYP, cls.hypotheses[j])
            return
        for x, c in enumerate(cols):
            one, zero = s & c, s & ~c
            if one and zero and solver(one) >= remaining - 1 and solver(zero) >= remaining - 1:
                nodes[eta] = (POINT, x)
                build(zero, eta + "0", remaining - 1)
                build(one, eta + "1", remaining - 1)
                return
        raise AssertionError("ldim recursion and tree search disagree")

    build((1 << len(cls)) - 1, "", height)
    return SpecialTree.build(height, nodes, leaves)


# -------------------------------------------------------------- threshold

@lru_cache(maxsize=64)
def _thr_solver(cols: tuple, n_hyp: int):
    """Longest extension of a threshold pattern from a given state.

    A state keeps, for each already-placed hypothesis slot, the set of
    candidates still matching its pattern, plus the set of hypotheses that
    are zero on every placed point. Slots whose candidate set contains
    another slot's set are redundant, so states are kept as antichains.
    """
    memo = {}

    def step(slots, zero, c):
        new_slots = [s & c for s in slots]
        if not all(new_slots):
            return None
        fresh = zero & ~c
        if not fresh:
            return None
        return _thr_normalize(new_slots + [fresh]), fresh

    def extra(slots, zero) -> int:
        key = (slots, zero)
        got = memo.get(key)
        if got is not None:
            return got
        best = 0
        for c in cols:
            nxt = step(slots, zero, c)
            if nxt is not None:
                best = max(best, 1 + extra(*nxt))
        memo[key] = best
        return best

    return extra, step


def thr_dim(cls: HypothesisClass) -> int:
    """Longest x_1..x_l, h_1..h_l with h_i(x_j) = 1 exactly when i < j."""
    if not len(cls):
        return 0
    cols = _point_columns(cls)
    extra, _ = _thr_solver(cols, len(cls))
    return extra(frozenset(), (1 << len(cls)) - 1)


def find_threshold_pattern(cls: HypothesisClass):
    """A maximum-length threshold witness as a HalfGraph (hypotheses left, points right)."""
    if not len(cls):
        return HalfGraph((), ())
    cols = _point_columns(cls)
    extra, _ = _thr_solver(cols, len(cls))
    full = (1 << len(cls)) - 1
    target = extra(frozenset(), full)
    # replay with explicit ordered slots so each hypothesis can be read off
    points, slots, zero = [], [], full
    remaining = target
    while remaining:
        for x, c in enumerate(cols):
            new_slots = [s & c for s in slots]
            fresh = zero & ~c
            if not fresh or not all(new_slots):
                continue
            normalized = _thr_normalize(new_slots + [fresh])
            if 1 + extra(normalized, fresh) == remaining:
                points.append(x)
                slots, zero = new_slots + [fresh], fresh
                remaining -= 1
                break
        else:
            raise AssertionError("threshold replay failed")
    hyps = [cls.hypotheses[(s & -s).bit_length() - 1] for s in slots]
    return HalfGraph(tuple((HYP, h) for h in hyps), tuple((POINT, x) for x in points))


def _thr_normalize(sets):
    uniq = sorted(set(sets), key=lambda s: (bin(s).count("1"), s))
    out = []
    for s in uniq:
        if not any(t & s == t for t in out):
            out.append(s)
    return frozenset(out)


def dual_vc_dim(cls: HypothesisClass) -> int:
    return vc_dim(dual(cls))


def dual_ldim(cls: HypothesisClass) -> int:
    return ldim(dual(cls))


def all_dims(cls: HypothesisClass) -> dict:
    return {
        "vc": vc_dim(cls),
        "ldim": ldim(cls),
        "thr": thr_dim(cls),
        "dual_vc": dual_vc_dim(cls),
        "dual_ldim": dual_ldim(cls),
    }


# ------------------------------------------------------ Hodges-Shelah

def halfgraph_to_tree(hg: HalfGraph, height: int) -> SpecialTree:
    """Build a special tree from a half-graph by repeatedly splitting at the midpoint.

    A node covering right-side indices (lo, hi] is labelled a_c for the
    midpoint c; leaves with index > c sit on its 1-side, the rest on its
    0-side. Needs at least 2^(height+1) pairs.
    """
    if height < 0:
        raise SatlabError("height must be nonnegative")
    if len(hg) < 1 << (height + 1):
        raise SatlabError(f"half-graph of length {len(hg)} is too short for height {height}")
    nodes, leaves = {}, {}

    def build(eta: str, lo: int, hi: int):
        if len(eta) == height:
            leaves[eta] = hg.right[lo]  # b_{lo+1} in 1-based terms
            return
        c = lo + (hi - lo) // 2  # a_c, 1-based
        nodes[eta] = hg.left[c - 1]
        build(eta + "0", lo, c)
        build(eta + "1", c, hi)

    build("", 0, len(hg))
    return SpecialTree.build(height, nodes, leaves)


@dataclass(frozen=True)
class Subtree:
    """A monochromatic generalized subtree.

    ``node_map`` and ``leaf_map`` send positions of the new tree to positions
    of the original one. Each new node's 0- and 1-subtrees live inside the
    matching extensions of its original position.
    """

    color: int
    height: int
    node_map: dict
    leaf_map: dict

    def apply(self, tree: SpecialTree) -> SpecialTree:
        return SpecialTree.build(
            self.height,
            {e: tree.node_map[o] for e, o in self.node_map.items()},
            {v: tree.leaf_map[o] for v, o in self.leaf_map.items()},
        )


def _mono_tables(height: int, coloring):
    tables = {}
    for c in (0, 1):
        best = {}
        for eta in reversed(tree_nodes(height)):
            k0 = best.get(eta + "0", 0)
            k1 = best.get(eta + "1", 0)
            through = 1 + min(k0, k1) if coloring[eta] == c else 0
            best[eta] = max(k0, k1, through)
        tables[c] = best
    return tables


def monochromatic_subtree(tree: SpecialTree, coloring) -> Subtree:
    """Largest subtree whose internal nodes all share one colour.

    ``coloring`` maps every internal position to 0 or 1. The result has height
    at least ceil(height / 2); colour 1 wins ties.
    """
    h = tree.height
    if h == 0:
        return Subtree(1, 0, {}, {"": ""})
    missing = set(tree_nodes(h)) - set(coloring)
    if missing:
        raise SatlabError("coloring must cover every internal node")
    tables = _mono_tables(h, coloring)
    color = 1 if tables[1][""] >= tables[0][""] else 0
    best = tables[color]
    target = best[""]
    node_map, leaf_map = {}, {}

    def value(eta):
        return best.get(eta, 0)

    def build(eta: str, new: str, t: int):
        if t == 0:
            leaf_map[new] = eta + "0" * (h - len(eta))
            return
        if len(eta) < h and coloring[eta] == color and 1 + min(value(eta + "0"), value(eta + "1")) >= t:
            node_map[new] = eta
            build(eta + "0", new + "0", t - 1)
            build(eta + "1", new + "1", t - 1)
        elif value(eta + "0") >= t:
            build(eta + "0", new, t)
        else:
            build(eta + "1", new, t)

    build("", "", target)
    return Subtree(color, target, node_map, leaf_map)


def _successor(tree: SpecialTree, bit: str) -> SpecialTree:
    h = tree.height - 1
    return SpecialTree.build(
        h,
        {e[1:]: lab for e, lab in tree.nodes if e.startswith(bit)},
        {v[1:]: lab for v, lab in tree.leaves if v.startswith(bit)},
    )


def halfgraph_length_for_height(height: int) -> int:
    """Largest k with 2^(k+2) - 2 <= height, or 0 when none."""
    k = 0
    while (1 << (k + 3)) - 2 <= height:
        k += 1
    return k if (1 << (k + 2)) - 2 <= height else 0


def tree_to_halfgraph(tree: SpecialTree, host, length: int | None = None) -> HalfGraph:
    """Recover a half-graph from a special tree of height >= 2^(length+2) - 2.

    Each round picks the leftmost leaf, colours the nodes by their relation
    to it and keeps a monochromatic subtree. Its root and that leaf form a
    pair that goes at the back of an ordering (related) or the front
    (unrelated), and the round continues in the root's successor subtree.
    In the final ordering an a-element precedes a b-element exactly when
    they are related; reading off an alternation b, a, b, a, ... then yields
    the half-graph.
    """
    if length is None:
        length = halfgraph_length_for_height(tree.height)
    if length < 1:
        raise SatlabError("half-graph length must be at least 1")
    if tree.height < (1 << (length + 2)) - 2:
        raise SatlabError(f"tree of height {tree.height} is too short for a half-graph of length {length}")
    front, back = [], []
    current = tree
    while current.height >= 1:
        leaf = current.leaf_map["0" * current.height]
        coloring = {e: int(bool(host.related(lab, leaf))) for e, lab in current.nodes}
        sub = monochromatic_subtree(current, coloring)
        mono = sub.apply(current)
        root = mono.node_map[""]
        if sub.color == 1:
            back.append((root, leaf))
            current = _successor(mono, "0")
        else:
            front.append((leaf, root))
            current = _successor(mono, "1")
    word = []
    for b, a in front:
        word += [("b", b), ("a", a)]
    for a, b in reversed(back):
        word += [("a", a), ("b", b)]
    left, right = [], []
    want = "b"
    for side, label in word:
        if side == want:
            (right if side == "b" else left).append(label)
            want = "a" if want == "b" else "b"
    pairs = min(len(left), len(right))
    if pairs < length:
        raise AssertionError("peeling produced fewer pairs than the height guarantees")
    return HalfGraph(tuple(left[:length]), tuple(right[:length]))
