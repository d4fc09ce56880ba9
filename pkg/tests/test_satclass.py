from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from satlab.core import ClassHost, HalfGraph, SatlabError, SpecialTree, make_class, tree_violations, \
    halfgraph_violations
from satlab.dims import find_mistake_tree, find_threshold_pattern, ldim
from satlab.generators import gen_matching, gen_subsets, pick_chain_parameters
from satlab.goodness import majority_function
from satlab.satclass import (
    devirtualize_halfgraph, devirtualize_leaves, devirtualize_nodes, game_value, has_small_transversal,
    is_level_uniform, is_saturated, k_realizable, lower_to_base, maj_p, realizability_order, representable,
    representable_functions, saturate, tree_label_levels,
)

from oracles import k_realizable_oracle

EPS_CHOICES = [Fraction(1, 2), Fraction(2, 5), Fraction(1, 3), Fraction(1, 4), Fraction(1, 5), Fraction(2, 7)]


@st.composite
def small_classes(draw, max_points=5, max_hyps=8):
    n = draw(st.integers(1, max_points))
    rows = draw(st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=1, max_size=max_hyps))
    return make_class([f"x{i}" for i in range(n)], rows)


@settings(max_examples=120, deadline=None)
@given(small_classes(), st.sampled_from(EPS_CHOICES))
def test_pruned_enumeration_matches_full_sweep(cls, eps):
    swept = {f for f in product((0, 1), repeat=cls.n_points) if representable(cls, f, eps) is not None}
    assert representable_functions(cls, eps) == swept


@settings(max_examples=150, deadline=None)
@given(small_classes(), st.data())
def test_representable_iff_game_value_below_eps(cls, data):
    f = tuple(data.draw(st.lists(st.integers(0, 1), min_size=cls.n_points, max_size=cls.n_points)))
    value = game_value(cls, f)
    for eps in EPS_CHOICES + ([value] if value > 0 else []):
        ws = representable(cls, f, eps)
        assert (ws is not None) == (value < eps)
        if ws is not None:
            assert majority_function(cls, ws, eps) == f


@settings(max_examples=150, deadline=None)
@given(small_classes(), st.data())
def test_k_realizable_matches_brute_force(cls, data):
    f = tuple(data.draw(st.lists(st.integers(0, 1), min_size=cls.n_points, max_size=cls.n_points)))
    for k in range(1, cls.n_points + 1):
        assert k_realizable(cls, f, k) == k_realizable_oracle(cls.hypotheses, f, k)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(0, 63), max_size=6), st.integers(0, 4))
def test_small_transversal_brute_force(sets, budget):
    points = range(6)
    want = any(all(any((s >> p) & 1 for p in pick) for s in sets)
               for size in range(budget + 1) for pick in combinations(points, size))
    assert has_small_transversal(sets, budget) == want


@settings(max_examples=60, deadline=None)
@given(small_classes(), st.sampled_from(EPS_CHOICES))
def test_saturation_trace_properties(cls, eps):
    trace = saturate(cls, eps)
    assert trace.reached_fixpoint
    levels = trace.levels
    for lower, upper in zip(levels, levels[1:]):
        assert lower.mask_set <= upper.mask_set
    assert levels[-1] == levels[-2]
    assert is_saturated(trace.final, eps)
    for f, (src, ws) in trace.provenance.items():
        assert majority_function(levels[src], ws, eps) == f
        assert trace.first_level(f) == src + 1
    # every function reached is k-realizable in the starting class for k < floor(1/eps)
    for f in trace.final.hypotheses:
        for k in range(1, realizability_order(eps)):
            assert k_realizable_oracle(cls.hypotheses, f, k)


@settings(max_examples=40, deadline=None)
@given(small_classes(max_points=4), st.sampled_from(EPS_CHOICES), st.data())
def test_fixpoint_is_the_smallest_saturated_superclass(cls, eps, data):
    final = saturate(cls, eps).final
    everything = make_class(cls.domain, list(product((0, 1), repeat=cls.n_points)))
    assert is_saturated(everything, eps)
    extra = data.draw(st.lists(st.sampled_from(everything.hypotheses), max_size=4))
    bigger = saturate(make_class(cls.domain, list(cls.hypotheses) + extra), eps).final
    assert final.mask_set <= bigger.mask_set


@settings(max_examples=60, deadline=None)
@given(small_classes(max_hyps=5))
def test_majority_votes_contain_the_class(cls):
    assert maj_p(cls, 1) == cls
    assert cls.mask_set <= maj_p(cls, 3).mask_set
    with pytest.raises(SatlabError):
        maj_p(cls, 2)


def test_frozen_saturations():
    assert [len(c) for c in saturate(gen_subsets(4, 2), Fraction(2, 5)).levels] == [6, 14, 16, 16]
    matching = saturate(gen_matching(5), Fraction(1, 4))
    assert [len(c) for c in matching.levels] == [5, 6, 6]
    assert set(matching.final.hypotheses) - set(matching.levels[0].hypotheses) == {(0,) * 5}
    n, eps = pick_chain_parameters(2)
    assert [len(c) for c in saturate(gen_subsets(n, 2), eps).levels] == [10, 15, 16, 16]


def test_game_value_matching():
    assert game_value(gen_matching(5), (0,) * 5) == Fraction(1, 5)


def test_realizability_order():
    assert realizability_order(Fraction(2, 5)) == 2
    assert realizability_order(Fraction(1, 3)) == 3
    with pytest.raises(SatlabError):
        realizability_order(0)


# ------------------------------------------------------- de-virtualization

def _assert_in_base(trace, tree):
    assert tree_violations(tree, ClassHost(trace.levels[0])) == []


def test_leaves_devirtualize_in_matching():
    trace = saturate(gen_matching(5), Fraction(1, 4))
    top = trace.levels[1]
    tree = find_mistake_tree(top, 1)
    zero = ("h", (0,) * 5)
    if zero not in tree.leaf_map.values():
        x = tree.node_map[""][1]
        tree = SpecialTree.build(1, {"": ("x", x)},
                                 {"0": zero, "1": ("h", tuple(int(i == x) for i in range(5)))})
    assert tree_violations(tree, ClassHost(top)) == []
    out = devirtualize_leaves(trace, tree, 0)
    _assert_in_base(trace, out)


@pytest.mark.parametrize("k", [2, 3])
def test_chain_trees_lower_to_base(k):
    n, eps = pick_chain_parameters(k)
    trace = saturate(gen_subsets(n, k), eps)
    for level in range(1, len(trace.levels)):
        cls = trace.levels[level]
        height = ldim(cls)
        if eps * height > 1:
            continue
        tree = find_mistake_tree(cls, height)
        assert max(tree_label_levels(trace, tree).values()) <= level
        _assert_in_base(trace, lower_to_base(trace, tree))


def test_level_uniform_node_tree_stays_uniform():
    eps = Fraction(1, 4)
    trace = saturate(gen_subsets(8, 4), eps)
    three = tuple(1 if i in (0, 1, 2) else 0 for i in range(8))
    assert trace.first_level(three) == 1
    four = tuple(1 if i in (0, 3, 4, 5) else 0 for i in range(8))
    # nodes are hypotheses, one per depth; leaves are points with the four patterns
    nodes = {"": ("h", three), "0": ("h", four), "1": ("h", four)}
    leaves = {"00": ("x", 7), "01": ("x", 3), "10": ("x", 1), "11": ("x", 0)}
    tree = SpecialTree.build(2, nodes, leaves)
    assert tree_violations(tree, ClassHost(trace.levels[1])) == []
    assert is_level_uniform(tree)
    out = devirtualize_nodes(trace, tree, 0)
    _assert_in_base(trace, out)
    assert is_level_uniform(out)


def test_halfgraph_devirtualizes():
    eps = Fraction(1, 4)
    trace = saturate(gen_subsets(8, 4), eps)
    top = trace.levels[1]
    hg = find_threshold_pattern(top)
    hg = HalfGraph(hg.left[:4], hg.right[:4])
    assert halfgraph_violations(hg, ClassHost(top)) == []
    out = devirtualize_halfgraph(trace, hg, 0)
    assert halfgraph_violations(out, ClassHost(trace.levels[0])) == []


def test_devirtualization_bounds_enforced():
    trace = saturate(gen_matching(5), Fraction(1, 4))
    tree = find_mistake_tree(trace.levels[1], 1)
    wide = SpecialTree.build(1, tree.node_map, tree.leaf_map)
    with pytest.raises(SatlabError):
        devirtualize_nodes(trace, wide, 0)  # leaves are hypotheses here, not points
    big_eps = saturate(gen_subsets(4, 2), Fraction(2, 5))
    hg = HalfGraph((("h", (1, 1, 0, 0)), ("h", (1, 0, 0, 0)), ("h", (0, 0, 0, 0))), (("x", 0), ("x", 1), ("x", 2)))
    with pytest.raises(SatlabError):
        devirtualize_halfgraph(big_eps, hg, 0)
