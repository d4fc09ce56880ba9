"""Goodness and excellence of weighted sets, majority opinions between sets,
and the tree-partition extraction procedures."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import VERTEX, Graph, HypothesisClass, SatlabError, SpecialTree, WeightedSet, tree_nodes


def _member_masks(host):
    """Return (member masks, evaluation size) for a class or a graph."""
    if isinstance(host, HypothesisClass):
        return host.masks, host.n_points
    if isinstance(host, Graph):
        return host.rows, len(host)
    raise SatlabError(f"unsupported host {type(host).__name__}")


def ones_mass(masks, ws: WeightedSet, point: int) -> Fraction:
    """Weight of members labelling ``point`` with 1."""
    return sum((w for i, w in ws.members if (masks[i] >> point) & 1), Fraction(0))


def majority_function(host, ws: WeightedSet, eps) -> tuple | None:
    """The majority label at each point, or None when some point has minority mass >= eps.

    Members index hypotheses of a class (evaluated on its domain) or
    vertices of a graph (evaluated on its vertex set).
    """
    eps = Fraction(eps)
    masks, n = _member_masks(host)
    for i, _ in ws.members:
        if not 0 <= i < len(masks):
            raise SatlabError(f"member index {i} out of range")
    out = []
    for x in range(n):
        one = ones_mass(masks, ws, x)
        zero = 1 - one
        if one == zero or min(one, zero) >= eps:
            return None
        out.append(1 if one > zero else 0)
    return tuple(out)


def is_good(host, ws: WeightedSet, eps) -> bool:
    return majority_function(host, ws, eps) is not None


def uniform(indices) -> WeightedSet:
    return WeightedSet.uniform(indices)


def opinion_mass(ws: WeightedSet, tau) -> Fraction:
    """Weight of members on which the opinion function ``tau`` is 1."""
    return sum((w for i, w in ws.members if tau[i]), Fraction(0))


def is_excellent(graph: Graph, ws: WeightedSet, eps, t_good=None) -> bool:
    """Good, and decisive about every opinion in ``t_good``: each mass lies in
    [0, eps] or [1 - eps, 1]. ``t_good`` defaults to the full table of the graph."""
    eps = Fraction(eps)
    if not is_good(graph, ws, eps):
        return False
    if t_good is None:
        from .satgraph import good_opinion_functions

        t_good = good_opinion_functions(graph, eps)
    for tau in t_good:
        mass = opinion_mass(ws, tau)
        if eps < mass < 1 - eps:
            return False
    return True


def pair_opinion(graph: Graph, a: WeightedSet, b: WeightedSet, eps):
    """The opinion ``a`` holds about ``b``: 1 or 0 when the mass of ``a`` on
    the majority function of ``b`` is decisive, None when balanced or when
    ``b`` is not good."""
    eps = Fraction(eps)
    tau_b = majority_function(graph, b, eps)
    if tau_b is None:
        return None
    mass = opinion_mass(a, tau_b)
    if mass >= 1 - eps:
        return 1
    if mass <= eps:
        return 0
    return None


# ------------------------------------------------------------- extraction

@dataclass(frozen=True)
class Extraction:
    """Outcome of an extraction: a subset of vertex indices or a special tree."""

    subset: tuple | None = None
    tree: SpecialTree | None = None
    depth: int = 0

    @property
    def found_set(self) -> bool:
        return self.subset is not None


def _counting_good(graph: Graph, piece: tuple, eps: Fraction) -> bool:
    pmask = sum(1 << x for x in piece)
    size = len(piece)
    for row in graph.rows:
        inside = bin(row & pmask).count("1")
        if min(inside, size - inside) >= eps * size:
            return False
    return True


def _split(piece, row):
    ones = tuple(x for x in piece if (row >> x) & 1)
    zeros = tuple(x for x in piece if not (row >> x) & 1)
    return zeros, ones


def _check_extraction_args(graph, subset, eps, m):
    eps = Fraction(eps)
    subset = tuple(sorted(set(subset)))
    if not subset:
        raise SatlabError("extraction needs a nonempty vertex set")
    if any(not 0 <= x < len(graph) for x in subset):
        raise SatlabError("vertex index out of range")
    if m < 0:
        raise SatlabError("depth must be nonnegative")
    return eps, subset


def _pick_leaves(pieces: dict, avoid: set) -> dict:
    leaves = {}
    for rho, piece in pieces.items():
        outside = [x for x in piece if x not in avoid]
        leaves[rho] = (outside or list(piece))[0]
    return leaves


def _fallback_piece(pieces: dict, accept) -> Extraction:
    """A final piece passing ``accept``, used when tiny pieces force a leaf onto a node.

    Final pieces already meet the size bound, and singletons are always
    accepted, so this only fails if the pieces themselves are broken.
    """
    for rho in sorted(pieces, key=lambda r: (-len(pieces[r]), r)):
        if accept(pieces[rho]):
            return Extraction(subset=pieces[rho], depth=len(rho))
    raise AssertionError("no final piece passes the check")


def extract_good(graph: Graph, subset, eps, m: int) -> Extraction:
    """Partition breadth-first by splitting vertices until a piece is good
    (counting weights) or depth ``m`` is reached, in which case the splitting
    vertices and one vertex per final piece form a special tree."""
    eps, subset = _check_extraction_args(graph, subset, eps, m)
    if not 0 < eps < Fraction(1, 2):
        raise SatlabError("extract_good needs 0 < eps < 1/2")
    pieces = {"": subset}
    nodes = {}
    for depth in range(m):
        nxt = {}
        for eta in sorted(pieces):
            piece = pieces[eta]
            if _counting_good(graph, piece, eps):
                return Extraction(subset=piece, depth=depth)
            size = len(piece)
            for v in range(len(graph)):
                zeros, ones = _split(piece, graph.rows[v])
                if min(len(zeros), len(ones)) >= eps * size:
                    nodes[eta] = v
                    nxt[eta + "0"], nxt[eta + "1"] = zeros, ones
                    break
            else:
                raise AssertionError("non-good piece without a splitting vertex")
        pieces = nxt
    leaves = _pick_leaves(pieces, set(nodes.values()))
    if set(leaves.values()) & set(nodes.values()):
        return _fallback_piece(pieces, lambda p: _counting_good(graph, p, eps))
    ids = graph.vertices
    tree = SpecialTree.build(
        m, {e: (VERTEX, ids[v]) for e, v in nodes.items()}, {r: (VERTEX, ids[x]) for r, x in leaves.items()}
    )
    return Extraction(tree=tree, depth=m)


def extract_excellent(graph: Graph, subset, eps, m: int, table=None) -> Extraction:
    """As :func:`extract_good`, but pieces must be excellent and splits use good-set opinions.

    When every branch survives to depth ``m`` the virtual nodes (good sets)
    are replaced by actual members that agree with every leaf below them;
    ``eps < 1/2^m`` makes such a member exist. ``table`` maps each good
    opinion function to a witnessing weighted set and defaults to the
    graph's full table.
    """
    eps, subset = _check_extraction_args(graph, subset, eps, m)
    if not 0 < eps < Fraction(1, 1 << m):
        raise SatlabError("extract_excellent needs 0 < eps < 1/2^m")
    if table is None:
        from .satgraph import good_opinion_table

        table = good_opinion_table(graph, eps)
    t_good = sorted(table)

    def excellent_piece(piece):
        if not _counting_good(graph, piece, eps):
            return False
        size = len(piece)
        for tau in t_good:
            ones = sum(tau[x] for x in piece)
            if eps * size < ones < (1 - eps) * size:
                return False
        return True

    pieces = {"": subset}
    splitters = {}
    for depth in range(m):
        nxt = {}
        for eta in sorted(pieces):
            piece = pieces[eta]
            if excellent_piece(piece):
                return Extraction(subset=piece, depth=depth)
            size = len(piece)
            chosen = None
            for tau in t_good:
                ones = tuple(x for x in piece if tau[x])
                zeros = tuple(x for x in piece if not tau[x])
                if min(len(ones), len(zeros)) > eps * size:
                    chosen = (tau, zeros, ones)
                    break
            if chosen is None:
                # fails only on goodness at the boundary; fall back to a vertex split
                for v in range(len(graph)):
                    zeros, ones = _split(piece, graph.rows[v])
                    if min(len(zeros), len(ones)) >= eps * size:
                        chosen = (graph.row(v), zeros, ones)
                        break
            if chosen is None:
                raise AssertionError("non-excellent piece without a split")
            splitters[eta] = chosen[0]
            nxt[eta + "0"], nxt[eta + "1"] = chosen[1], chosen[2]
        pieces = nxt
    leaves = _pick_leaves(pieces, set())
    leaf_vertices = set(leaves.values())
    nodes = {}
    for eta in tree_nodes(m):
        tau = splitters[eta]
        below = [x for rho, x in leaves.items() if rho.startswith(eta)]
        ws = table[tau]
        ok = [
            u for u, _ in ws.members
            if all(bool((graph.rows[u] >> x) & 1) == bool(tau[x]) for x in below)
        ]
        if not ok:
            raise AssertionError("union bound failed while choosing a node representative")
        preferred = [u for u in ok if u not in leaf_vertices]
        if not preferred:
            return _fallback_piece(pieces, excellent_piece)
        nodes[eta] = preferred[0]
    ids = graph.vertices
    tree = SpecialTree.build(
        m, {e: (VERTEX, ids[v]) for e, v in nodes.items()}, {r: (VERTEX, ids[x]) for r, x in leaves.items()}
    )
    return Extraction(tree=tree, depth=m)


def counting_ws(subset) -> WeightedSet:
    """Uniform weights over a plain vertex subset."""
    return WeightedSet.uniform(subset)


def size_bound_met(found: int, total: int, eps, m: int) -> bool:
    """Exact check of |Y| >= eps^m |X|."""
    return Fraction(found) >= Fraction(eps) ** m * total


__all__ = [
    "Extraction", "counting_ws", "extract_excellent", "extract_good", "is_excellent", "is_good",
    "majority_function", "ones_mass", "opinion_mass", "pair_opinion", "size_bound_met", "uniform",
]
