"""Deterministic and seeded instance generators, and the search for a graph
with good sides that are not excellent.

Randomness comes from ``random.Random(seed)`` (Mersenne Twister), using
integer draws only so that every instance is bit-reproducible.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from .core import (
    VERTEX, Graph, HypothesisClass, RuleHost, SatlabError, SpecialTree, WeightedSet, class_from_graph, graph_from_rows,
    make_class, make_graph, tree_leaves, tree_nodes,
)

PRNG_ALGORITHM = "python-random-mt19937"


def _rng(seed):
    import random

    return random.Random(seed)


def _coin(rng, p: Fraction) -> bool:
    p = Fraction(p)
    return rng.randrange(p.denominator) < p.numerator


def gen_clique(n: int) -> Graph:
    if n < 1:
        raise SatlabError("n must be at least 1")
    return make_graph([f"v{i}" for i in range(n)], combinations(range(n), 2))


def gen_anticlique(n: int) -> Graph:
    if n < 1:
        raise SatlabError("n must be at least 1")
    return make_graph([f"v{i}" for i in range(n)])


def gen_matching(n: int) -> HypothesisClass:
    """Point indicators over n points: h_x(z) = 1 iff z = x."""
    if n < 1:
        raise SatlabError("n must be at least 1")
    return make_class([f"x{i}" for i in range(1, n + 1)], [[int(i == j) for i in range(n)] for j in range(n)])


def gen_subsets(n: int, k: int) -> HypothesisClass:
    """Indicators of every k-subset of an n-point domain."""
    if not n >= k >= 1:
        raise SatlabError("need n >= k >= 1")
    return make_class([f"x{i}" for i in range(1, n + 1)], [[int(i in s) for i in range(n)] for s in combinations(range(n), k)])


def gen_halfgraph(k: int, seed=None, noise=Fraction(0)) -> Graph:
    """Vertices a1..ak, b1..bk with a_i ~ b_j iff i < j.

    With ``noise`` > 0 each pair inside one side becomes an edge with that
    probability; cross edges always follow the half-graph pattern.
    """
    if k < 1:
        raise SatlabError("k must be at least 1")
    noise = Fraction(noise)
    if not 0 <= noise <= 1:
        raise SatlabError("noise must be a probability")
    edges = [(i, k + j) for i in range(k) for j in range(k) if i < j]
    if noise:
        rng = _rng(seed)
        for side in (0, k):
            for i, j in combinations(range(k), 2):
                if _coin(rng, noise):
                    edges.append((side + i, side + j))
    names = [f"a{i}" for i in range(1, k + 1)] + [f"b{j}" for j in range(1, k + 1)]
    return make_graph(names, edges)


def halfgraph_sides(graph: Graph):
    """Index lists (A, B) of a graph produced by :func:`gen_halfgraph`."""
    a = [i for i, v in enumerate(graph.vertices) if v.startswith("a")]
    b = [i for i, v in enumerate(graph.vertices) if v.startswith("b")]
    return a, b


def gen_halfgraph_class(k: int) -> HypothesisClass:
    """Threshold class: h_i(x_j) = 1 iff i < j, for i, j in 1..k."""
    if k < 1:
        raise SatlabError("k must be at least 1")
    return make_class([f"x{j}" for j in range(1, k + 1)], [[int(i < j) for j in range(k)] for i in range(k)])


def pick_chain_parameters(k: int):
    """Smallest n > 2k - 2 whose window of admissible eps is nonempty, and its midpoint.

    The window is (1/(n-k+1), min(2/n, 1/(k+1))). The extra upper bound
    1/(k+1) keeps (k+1)-subsets out of every level.
    """
    if k < 1:
        raise SatlabError("k must be at least 1")
    n = 2 * k - 1
    while True:
        lo = Fraction(1, n - k + 1)
        hi = min(Fraction(2, n), Fraction(1, k + 1))
        if lo < hi:
            return n, (lo + hi) / 2
        n += 1


def gen_random_class(nx: int, nh: int, seed, density=Fraction(1, 2)) -> HypothesisClass:
    """nh random label rows over nx points (duplicates collapse)."""
    rng = _rng(seed)
    rows = [[int(_coin(rng, density)) for _ in range(nx)] for _ in range(nh)]
    return make_class([f"x{i}" for i in range(1, nx + 1)], rows)


def gen_random_graph(n: int, seed, p=Fraction(1, 2), loops: bool = False) -> Graph:
    rng = _rng(seed)
    edges = [(i, j) for i, j in combinations(range(n), 2) if _coin(rng, p)]
    loop_list = [i for i in range(n) if loops and _coin(rng, p)]
    return make_graph([f"v{i}" for i in range(n)], edges, loop_list)


def gen_random_stable_graph(n: int, forbidden_k: int, seed, p=Fraction(1, 2), max_tries: int = 10_000) -> Graph:
    """Random graph whose neighbourhood class has threshold dimension below ``forbidden_k``."""
    from .dims import thr_dim

    rng = _rng(seed)
    for _ in range(max_tries):
        g = gen_random_graph(n, rng.randrange(1 << 62), p)
        if thr_dim(class_from_graph(g)) < forbidden_k:
            return g
    raise SatlabError(f"no {forbidden_k}-stable sample in {max_tries} tries")


def gen_bounded_degree_graph(n: int, d: int, seed) -> Graph:
    """Random graph with every degree at most d."""
    rng = _rng(seed)
    pairs = list(combinations(range(n), 2))
    rng.shuffle(pairs)
    deg = [0] * n
    edges = []
    for i, j in pairs:
        if deg[i] < d and deg[j] < d and rng.randrange(2):
            edges.append((i, j))
            deg[i] += 1
            deg[j] += 1
    return make_graph([f"v{i}" for i in range(n)], edges)


def gen_planted_splitters(base: int, seed=None) -> Graph:
    """Finite stand-in for the random graph's extension property.

    The first ``base`` vertices form a random graph; for every subset X of
    them with |X| >= 2 one extra vertex is adjacent to exactly floor(|X|/2)
    members of X (and to nothing else in the base).
    """
    rng = _rng(seed)
    edges = [(i, j) for i, j in combinations(range(base), 2) if rng.randrange(2)]
    names = [f"v{i}" for i in range(base)]
    for size in range(2, base + 1):
        for subset in combinations(range(base), size):
            s = len(names)
            names.append("split_" + "_".join(map(str, subset)))
            picks = list(subset)
            rng.shuffle(picks)
            for x in picks[: size // 2]:
                edges.append((s, x))
    return make_graph(names, edges)


def gen_cluster_graph(types: int, max_cluster: int, seed, noise=Fraction(0), max_vertices: int = 10) -> Graph:
    """Blow up a random graph on ``types`` vertices into clusters of twins.

    Each cluster is a clique or an anticlique; cross-cluster edges follow the
    type graph, and with ``noise`` > 0 each pair is then flipped with that
    probability. Clusters give many non-singleton excellent sets.
    """
    rng = _rng(seed)
    sizes = [rng.randint(1, max_cluster) for _ in range(types)]
    while sum(sizes) > max_vertices:
        sizes[sizes.index(max(sizes))] -= 1
    owner = [t for t, size in enumerate(sizes) for _ in range(size)]
    type_edge = {(a, b): rng.randrange(2) for a in range(types) for b in range(a, types)}
    edges = []
    for i, j in combinations(range(len(owner)), 2):
        a, b = sorted((owner[i], owner[j]))
        linked = bool(type_edge[(a, b)])
        if noise and _coin(rng, noise):
            linked = not linked
        if linked:
            edges.append((i, j))
    return make_graph([f"c{owner[i]}_{i}" for i in range(len(owner))], edges)


def gen_vcblowup(n: int = 10, d: int = 2) -> HypothesisClass:
    return gen_subsets(n, d)


# ---------------------------------------------------- large synthetic trees

def pattern_tree(height: int, seed=0):
    """A special tree on fresh labels with a rule host for very large heights.

    Node eta and leaf nu are related as the tree requires when eta is a
    prefix of nu; other pairs get a seeded pseudo-random bit.
    """
    nodes = {e: (VERTEX, "n" + e) for e in tree_nodes(height)}
    leaves = {v: (VERTEX, "l" + v) for v in tree_leaves(height)}
    salt = str(seed).encode()

    def rule(p, q):
        a, b = sorted((p[1], q[1]))
        if not (a.startswith("l") and b.startswith("n")):
            return bool(zlib.crc32(salt + a.encode() + b"|" + b.encode()) & 1)
        a, b = (VERTEX, b), (VERTEX, a)
        eta, nu = a[1][1:], b[1][1:]
        if nu.startswith(eta):
            return nu[len(eta)] == "1"
        return bool(zlib.crc32(salt + eta.encode() + b"|" + nu.encode()) & 1)

    return SpecialTree.build(height, nodes, leaves), RuleHost(rule)


# --------------------------------------------------- good but not excellent

@dataclass(frozen=True)
class GoodNotExcellent:
    graph: Graph
    side_a: WeightedSet
    side_b: WeightedSet
    searched: int


def _cross_candidates(side: int, rng):
    """Random cross matrices (rows: A, cols: B) with row sums in {0,2,4} and
    column sums in {0,1,5}.

    Row sums are the B-degrees of A-vertices and column sums the A-degrees of
    B-vertices. With no edges inside a side these are all the degrees, so
    every vertex sees each side in a proportion from {0, 1, 2, 4, 5, 6}/6.
    """
    by_total = {}
    for cols in product((0, 1, 5), repeat=side):
        by_total.setdefault(sum(cols), []).append(cols)
    row_choices = [r for r in product((0, 2, 4), repeat=side) if sum(r) in by_total]
    while True:
        row_sums = rng.choice(row_choices)
        col_sums = rng.choice(by_total[sum(row_sums)])
        m = _random_bipartite(row_sums, col_sums, rng)
        if m is not None:
            yield m


def _random_bipartite(row_sums, col_sums, rng):
    """Random 0/1 matrix with the given margins by randomized greedy filling."""
    rows = len(row_sums)
    cols = len(col_sums)
    need = list(col_sums)
    m = [[0] * cols for _ in range(rows)]
    order = list(range(rows))
    rng.shuffle(order)
    for r in sorted(order, key=lambda i: -row_sums[i]):
        avail = [c for c in range(cols) if need[c] > 0]
        if len(avail) < row_sums[r]:
            return None
        rng.shuffle(avail)
        avail.sort(key=lambda c: -need[c])
        for c in avail[: row_sums[r]]:
            m[r][c] = 1
            need[c] -= 1
    return m if not any(need) else None


def search_good_not_excellent(eps=Fraction(21, 60), side: int = 6, seed=0, limit: int = 20_000) -> GoodNotExcellent:
    """Search bipartite-style graphs on A + B until both uniform sides are good,
    neither is excellent, and neither side has a defined opinion of the other."""
    from .goodness import is_excellent, is_good, pair_opinion
    from .satgraph import good_opinion_functions

    eps = Fraction(eps)
    rng = _rng(seed)
    names = [f"a{i}" for i in range(1, side + 1)] + [f"b{j}" for j in range(1, side + 1)]
    a_ws = WeightedSet.uniform(range(side))
    b_ws = WeightedSet.uniform(range(side, 2 * side))
    searched = 0
    seen = set()
    for matrix in _cross_candidates(side, rng):
        key = tuple(map(tuple, matrix))
        if key in seen:
            continue
        seen.add(key)
        searched += 1
        if searched > limit:
            break
        rows = [0] * (2 * side)
        for i in range(side):
            for j in range(side):
                if matrix[i][j]:
                    rows[i] |= 1 << (side + j)
                    rows[side + j] |= 1 << i
        g = graph_from_rows(names, rows)
        if not (is_good(g, a_ws, eps) and is_good(g, b_ws, eps)):
            continue
        if pair_opinion(g, a_ws, b_ws, eps) is not None or pair_opinion(g, b_ws, a_ws, eps) is not None:
            continue
        t_good = good_opinion_functions(g, eps)
        if is_excellent(g, a_ws, eps, t_good) or is_excellent(g, b_ws, eps, t_good):
            continue
        return GoodNotExcellent(g, a_ws, b_ws, searched)
    raise SatlabError(f"search exhausted after {searched} candidate graphs")


EXAMPLE_NAMES = ("example15", "kchain", "vcblowup", "clique", "matching", "halfgraph", "good-not-excellent", "random")


def example_instance(name: str, seed=0, k: int = 2):
    """The instance behind ``satlab example --name``; returns (instance, suggested eps)."""
    if name == "example15":
        return gen_subsets(4, 2), Fraction(2, 5)
    if name == "kchain":
        n, eps = pick_chain_parameters(k)
        return gen_subsets(n, k), eps
    if name == "vcblowup":
        return gen_vcblowup(10, 2), Fraction(2, 5)
    if name == "clique":
        return gen_clique(5), Fraction(1, 4)
    if name == "matching":
        return gen_matching(5), Fraction(1, 4)
    if name == "halfgraph":
        return gen_halfgraph(8, seed), Fraction(1, 6)
    if name == "good-not-excellent":
        return search_good_not_excellent(seed=seed).graph, Fraction(21, 60)
    if name == "random":
        return gen_random_class(6, 10, seed), Fraction(1, 3)
    raise SatlabError(f"unknown example {name!r}; choose from {', '.join(EXAMPLE_NAMES)}")
