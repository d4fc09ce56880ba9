"""Acceptance criteria, one test each; every test prints a PASS or FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``.
"""

import os
import sys
import time
from fractions import Fraction
from itertools import combinations, product

import pytest

from satlab.cli import run_suite
from satlab.core import GraphHost, HalfGraph, WeightedSet, halfgraph_violations, make_class, \
    tree_violations
from satlab.dims import halfgraph_to_tree, ldim, tree_to_halfgraph, vc_dim
from satlab.generators import (
    gen_anticlique, gen_clique, gen_halfgraph, gen_random_class, gen_subsets, gen_vcblowup, halfgraph_sides,
    pattern_tree, pick_chain_parameters, search_good_not_excellent,
)
from satlab.goodness import is_excellent, is_good, pair_opinion
from satlab.satclass import is_saturated, saturate
from satlab.satgraph import graph_is_saturated, graph_saturate

JOBS = max(1, min(8, os.cpu_count() or 1))


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line for the criterion, bypassing output capture."""

    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"

    return emit


def _sizes(trace):
    return [len(level) for level in trace.levels]


def test_criterion_01_example15(report):
    start = time.perf_counter()
    trace = saturate(gen_subsets(4, 2), Fraction(2, 5))
    elapsed = time.perf_counter() - start
    sizes = _sizes(trace)
    levels = trace.levels
    singletons = {tuple(int(i == j) for i in range(4)) for j in range(4)}
    ok = (
        sizes[:3] == [6, 10, 11] and len(levels) == 4 and levels[2] == levels[3]
        and set(levels[1].hypotheses) - set(levels[0].hypotheses) == singletons
        and set(levels[2].hypotheses) - set(levels[1].hypotheses) == {(0, 0, 0, 0)}
        and elapsed < 1
    )
    report(1, "4-point 2-subsets at eps=2/5 give level sizes 6, 10, 11", ok,
           f"observed sizes {sizes}, {elapsed:.2f}s")


@pytest.mark.parametrize("k", [2, 3])
def test_criterion_02_chain(k, report):
    start = time.perf_counter()
    n, eps = pick_chain_parameters(k)
    trace = saturate(gen_subsets(n, k), eps)
    sizes = _sizes(trace)
    grows = all(sizes[i] < sizes[i + 1] for i in range(k)) and sizes[k] == sizes[k + 1]
    dims = [(vc_dim(c), ldim(c)) for c in trace.levels]
    elapsed = time.perf_counter() - start
    ok = trace.reached_fixpoint and grows and all(d == (k, k) for d in dims) and elapsed < 60
    report(2, f"{k}-step chain (n={n}, eps={eps})", ok, f"sizes {sizes}, (vc, ldim) {dims}, {elapsed:.1f}s")


def test_criterion_03_vc_blowup(report):
    start = time.perf_counter()
    trace = saturate(gen_vcblowup(10, 2), Fraction(2, 5), max_levels=3)
    vcs = [vc_dim(c) for c in trace.levels[:4]]
    elapsed = time.perf_counter() - start
    ok = len(vcs) == 4 and all(v >= n + 2 for n, v in enumerate(vcs)) and elapsed < 300
    report(3, "VC blow-up over 10 points at eps=2/5", ok, f"vc by level {vcs}, sizes {_sizes(trace)}, {elapsed:.0f}s")


def test_criterion_04_preservation(report):
    start = time.perf_counter()
    rows = run_suite("preservation", seed=42, trials=200, jobs=JOBS)
    bad = [r for r in rows if not r["ok"]]
    trials = len({r["trial"] for r in rows})
    in_range = all(r["nx"] <= 6 and r["nh"] <= 12 for r in rows)
    elapsed = time.perf_counter() - start
    ok = trials >= 200 and in_range and not bad and elapsed < 600
    report(4, "dimension preservation in the small-eps regimes", ok,
           f"{trials} classes, {len(rows)} checks, {len(bad)} violations, {elapsed:.0f}s")


def test_criterion_05_backtrack(report):
    rows = run_suite("backtrack", seed=42, trials=200, jobs=JOBS)
    bad = [r for r in rows if not r["ok"]]
    report(5, "fixpoint functions are k-realizable in the start class for k < floor(1/eps)", not bad,
           f"{len(rows)} class/eps pairs, {len(bad)} violations")


def test_criterion_06_duality(report):
    rows = run_suite("duality", seed=42, trials=100, jobs=JOBS)
    bad = [r for r in rows if not r["ok"]]
    ok = len(rows) >= 500 and not bad
    report(6, "representable exactly when the game value is below eps", ok,
           f"{len(rows)} triples, {len(bad)} mismatches")


def test_criterion_07_saturated_fixpoint(report):
    problems = 0
    checked = 0
    for seed in range(40):
        cls = gen_random_class(4 + seed % 2, 3 + seed % 6, seed)
        for eps in (Fraction(1, 2), Fraction(1, 3), Fraction(2, 7), Fraction(1, 5)):
            trace = saturate(cls, eps)
            checked += 1
            if not (trace.reached_fixpoint and is_saturated(trace.final, eps)):
                problems += 1
                continue
            # minimality: the whole function space is saturated, and saturating any
            # superclass of the start never misses a fixpoint function
            everything = list(product((0, 1), repeat=cls.n_points))
            if not is_saturated(make_class(cls.domain, everything), eps):
                problems += 1
            extra = everything[seed % len(everything):][:3]
            bigger = saturate(make_class(cls.domain, list(cls.hypotheses) + extra), eps).final
            if not trace.final.mask_set <= bigger.mask_set:
                problems += 1
    report(7, "last level saturated and minimal", problems == 0, f"{checked} traces, {problems} problems")


def test_criterion_08_graph_examples(report):
    start = time.perf_counter()
    failures = []
    clique = graph_saturate(gen_clique(5), Fraction(1, 4))
    g1 = clique.levels[1]
    new = [v for v in g1.vertices if v not in clique.levels[0].index_of]
    if _sizes(clique) != [5, 6, 6] or len(new) != 1:
        failures.append(f"clique sizes {_sizes(clique)}")
    else:
        u = g1.index_of[new[0]]
        if not all(g1.adjacent(u, v) for v in range(len(g1))):
            failures.append("new clique vertex is not universal and looped")
    for name, graph, eps in [("anticlique(3)", gen_anticlique(3), Fraction(1, 4)),
                             ("half-graph(4) at 1/6", gen_halfgraph(4), Fraction(1, 6)),
                             ("half-graph(6) at 1/7", gen_halfgraph(6), Fraction(1, 7))]:
        trace = graph_saturate(graph, eps)
        if not (len(trace.levels) == 2 and graph_is_saturated(graph, eps)):
            failures.append(f"{name} not an immediate fixpoint")
    k = 8
    hg = gen_halfgraph(k)
    a, b = halfgraph_sides(hg)
    for side in (a, b):
        for r in range(2, k + 1):
            for subset in combinations(side, r):
                if is_good(hg, WeightedSet.uniform(subset), Fraction(1, 3)):
                    failures.append(f"one-sided {subset} is 1/3-good")
    # mixed sets, kept one step away from the ends of the finite half-graph
    inner = a[1:-1] + b[1:-1]
    for r in range(2, len(inner) + 1):
        for subset in combinations(inner, r):
            if set(subset) & set(a) and set(subset) & set(b):
                if is_good(hg, WeightedSet.uniform(subset), Fraction(1, 6)):
                    failures.append(f"mixed {subset} is 1/6-good")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 30
    report(8, "clique, anticlique and half-graph examples", ok,
           "; ".join(failures[:3]) or f"all checks hold, {elapsed:.1f}s")


def test_criterion_09_hodges_shelah(report):
    failures = []
    g = gen_halfgraph(8)
    a, b = halfgraph_sides(g)
    hg = HalfGraph(tuple(("v", g.vertices[i]) for i in a), tuple(("v", g.vertices[j]) for j in b))
    tree = halfgraph_to_tree(hg, 2)
    if tree.height != 2 or tree_violations(tree, GraphHost(g)):
        failures.append("length-8 half-graph did not give a valid height-2 tree")
    for height, length in ((6, 1), (14, 2)):
        t, host = pattern_tree(height)
        if tree_violations(t, host):
            failures.append(f"height-{height} source tree invalid")
        out = tree_to_halfgraph(t, host, length)
        if len(out) != length or halfgraph_violations(out, host):
            failures.append(f"height-{height} tree did not give a valid length-{length} half-graph")
    report(9, "half-graph and special-tree conversions", not failures, "; ".join(failures) or "all witnesses valid")


def test_criterion_10_extraction(report):
    rows = run_suite("extraction", seed=42, trials=20, jobs=JOBS)
    bad = [r for r in rows if not r["ok"]]
    sets = sum(1 for r in rows if r["kind"] == "stable" and r["result"] == "set")
    trees = sum(1 for r in rows if r["kind"] == "planted" and r["result"] == "tree")
    ok = not bad and sets == trees == 40
    report(10, "extraction returns large good/excellent sets or valid special trees", ok,
           f"{sets} stable sets, {trees} planted trees, {len(bad)} violations")


def test_criterion_11_good_not_excellent(report):
    start = time.perf_counter()
    eps = Fraction(21, 60)
    w = search_good_not_excellent(eps, side=6, seed=0)
    g, a, b = w.graph, w.side_a, w.side_b
    ok = (
        len(a.members) == 6 and len(b.members) == 6
        and is_good(g, a, eps) and is_good(g, b, eps)
        and not is_excellent(g, a, eps) and not is_excellent(g, b, eps)
        and pair_opinion(g, a, b, eps) is None and pair_opinion(g, b, a, eps) is None
        and time.perf_counter() - start < 300
    )
    report(11, "good but not excellent sides at eps=21/60", ok, f"found after {w.searched} candidates")


def test_criterion_12_symmetry(report):
    rows = run_suite("symmetry", seed=42, trials=30, jobs=JOBS)
    bad = [r for r in rows if not r["ok"]]
    pairs = sum(r["pairs"] for r in rows)
    nonsingleton = sum(r["excellent_sets"] for r in rows)
    report(12, "opinions between excellent sets are defined and symmetric", not bad,
           f"{pairs} ordered pairs from {nonsingleton} excellent sets, {len(bad)} violations")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
