"""The ``satlab`` command line: dimensions, saturation runs, verification
suites and example instances.

Exit codes: 0 success, 1 violations found, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from itertools import combinations

from . import dims as D
from .core import (
    Graph, GraphHost, HypothesisClass, SatlabError, WeightedSet, class_from_graph, format_rational,
    load_instance, make_class, parse_rational, tree_violations,
)
from .generators import (
    EXAMPLE_NAMES, _rng, example_instance, gen_cluster_graph, gen_halfgraph, gen_random_stable_graph, halfgraph_sides,
)
from .goodness import (
    extract_excellent, extract_good, is_excellent, is_good, majority_function, pair_opinion, size_bound_met,
)
from .satclass import game_value, k_realizable, maj_p, realizability_order, representable, saturate
from .satgraph import good_opinion_table, graph_saturate, signature_table

SUITES = ("preservation", "backtrack", "duality", "symmetry", "regimes", "extraction")
DEFAULT_TRIALS = {"preservation": 200, "backtrack": 200, "duality": 100, "symmetry": 30, "regimes": 50,
                  "extraction": 20}

# CSV columns per suite; JSON reports use the same keys.
COLUMNS = {
    "preservation": ["trial", "nx", "nh", "regime", "eps", "measure", "before", "after", "ok"],
    "backtrack": ["trial", "nx", "nh", "eps", "fixpoint_size", "k_checked", "violations", "maj_p", "ok"],
    "duality": ["trial", "nx", "nh", "function", "eps", "game_value", "representable", "ok"],
    "symmetry": ["trial", "n", "eps", "excellent_sets", "pairs", "undefined", "asymmetric", "ok"],
    "regimes": ["trial", "nx", "nh", "regime", "eps", "levels", "vc0", "vc", "ldim0", "ldim", "thr0", "thr",
                "claim", "ok"],
    "extraction": ["trial", "kind", "n", "eps", "m", "procedure", "result", "size", "bound_ok", "valid", "ok"],
}


def _trial_seed(seed: int, index: int) -> int:
    return seed * 1_000_003 + index


def _random_small_class(rng, max_points=6, max_hyps=12) -> HypothesisClass:
    while True:
        nx = rng.randint(3, max_points)
        nh = rng.randint(2, max_hyps)
        rows = [[rng.randrange(2) for _ in range(nx)] for _ in range(nh)]
        cls = make_class([f"x{i}" for i in range(1, nx + 1)], rows)
        if len(cls) >= 2:
            return cls


def _bits(t) -> str:
    return "".join(map(str, t))


# ----------------------------------------------------------------- suites

def _trial_preservation(seed: int, index: int) -> list:
    rng = _rng(_trial_seed(seed, index))
    cls = _random_small_class(rng)
    base = D.all_dims(cls)
    rows = []
    plans = [
        ("eps=1/(ldim+1)", Fraction(1, base["ldim"] + 1), ["ldim"]),
        ("eps=1/(vc+1)", Fraction(1, base["vc"] + 1), ["vc"]),
        ("eps<1/2^(ldim+2)", Fraction(1, (1 << (base["ldim"] + 2)) + 1),
         ["ldim", "vc", "thr", "dual_vc", "dual_ldim"]),
    ]
    for regime, eps, measures in plans:
        final = saturate(cls, eps).final
        after = D.all_dims(final)
        for m in measures:
            rows.append({"trial": index, "nx": cls.n_points, "nh": len(cls), "regime": regime,
                         "eps": format_rational(eps), "measure": m, "before": base[m], "after": after[m],
                         "ok": base[m] == after[m]})
    return rows


def _maj_search(cls, final, max_p=7):
    target = final.mask_set
    for p in range(1, max_p + 1, 2):
        try:
            if target <= maj_p(cls, p).mask_set:
                return p
        except SatlabError:
            return None
    return None


def _trial_backtrack(seed: int, index: int) -> list:
    rng = _rng(_trial_seed(seed, index))
    cls = _random_small_class(rng)
    rows = []
    for eps in (Fraction(1, 2), Fraction(1, 3), Fraction(1, 4), Fraction(1, 5)):
        final = saturate(cls, eps).final
        kmax = realizability_order(eps) - 1
        bad = 0
        for f in final.hypotheses:
            for k in range(1, kmax + 1):
                if not k_realizable(cls, f, k):
                    bad += 1
                    break
        rows.append({"trial": index, "nx": cls.n_points, "nh": len(cls), "eps": format_rational(eps),
                     "fixpoint_size": len(final), "k_checked": kmax, "violations": bad,
                     "maj_p": _maj_search(cls, final) or "", "ok": bad == 0})
    return rows


_DUALITY_EPS = [Fraction(1, 2), Fraction(2, 5), Fraction(1, 3), Fraction(1, 4), Fraction(1, 5), Fraction(1, 6),
                Fraction(1, 8)]


def _trial_duality(seed: int, index: int) -> list:
    rng = _rng(_trial_seed(seed, index))
    cls = _random_small_class(rng)
    n = cls.n_points
    rows = []
    funcs = [tuple(rng.randrange(2) for _ in range(n)) for _ in range(3)]
    funcs.append(cls.hypotheses[rng.randrange(len(cls))])
    funcs.append(tuple(0 for _ in range(n)))
    for j, f in enumerate(funcs):
        value = game_value(cls, f)
        choices = [rng.choice(_DUALITY_EPS)]
        if value > 0:
            choices.append(value)  # the boundary: strictness must reject it
        for eps in choices:
            rep = representable(cls, f, eps) is not None
            ok = rep == (value < eps)
            if rep:
                ws = representable(cls, f, eps)
                ok = ok and majority_function(cls, ws, eps) == f
            rows.append({"trial": index, "nx": n, "nh": len(cls), "function": _bits(f), "eps": format_rational(eps),
                         "game_value": format_rational(value), "representable": rep, "ok": ok})
    return rows


def _excellent_pool(graph: Graph, eps):
    """Excellent weighted sets: signature witnesses plus uniform excellent subsets."""
    table = good_opinion_table(graph, eps)
    t_good = sorted(table)
    pool = list(signature_table(graph, eps, table).values())
    for size in range(2, len(graph) + 1):
        for subset in combinations(range(len(graph)), size):
            ws = WeightedSet.uniform(subset)
            if is_excellent(graph, ws, eps, t_good):
                pool.append(ws)
    return pool


def _trial_symmetry(seed: int, index: int) -> list:
    rng = _rng(_trial_seed(seed, index))
    eps = Fraction(1, 5)
    noise = Fraction(rng.randrange(3), 20)
    graph = gen_cluster_graph(rng.randint(2, 4), 5, rng.randrange(1 << 30), noise)
    n = len(graph)
    pool = _excellent_pool(graph, eps)
    undefined = asym = pairs = 0
    for a in pool:
        for b in pool:
            pairs += 1
            ab, ba = pair_opinion(graph, a, b, eps), pair_opinion(graph, b, a, eps)
            if ab is None or ba is None:
                undefined += 1
            elif ab != ba:
                asym += 1
    return [{"trial": index, "n": n, "eps": format_rational(eps), "excellent_sets": len(pool), "pairs": pairs,
             "undefined": undefined, "asymmetric": asym, "ok": undefined == 0 and asym == 0}]


def _trial_regimes(seed: int, index: int) -> list:
    rng = _rng(_trial_seed(seed, index))
    cls = _random_small_class(rng)
    base = D.all_dims(cls)
    l, d = base["ldim"], base["vc"]
    regimes = [
        ("eps<=1/(ldim+1)", Fraction(1, l + 1), "ldim preserved"),
        ("eps<=1/(vc+1)", Fraction(1, d + 1), "vc preserved"),
        ("eps<1/2^(ldim+2)", Fraction(1, (1 << (l + 2)) + 1), "ldim, vc, thr preserved"),
        ("eps>1/(vc+1)", min(Fraction(1, 2), Fraction(1, d + 1) + Fraction(1, 12)), "growth allowed"),
    ]
    rows = []
    for name, eps, claim in regimes:
        trace = saturate(cls, eps)
        after = D.all_dims(trace.final)
        if claim == "ldim preserved":
            ok = after["ldim"] == l
        elif claim == "vc preserved":
            ok = after["vc"] == d
        elif claim == "growth allowed":
            ok = True
        else:
            ok = after["ldim"] == l and after["vc"] == d and after["thr"] == base["thr"]
        rows.append({"trial": index, "nx": cls.n_points, "nh": len(cls), "regime": name, "eps": format_rational(eps),
                     "levels": len(trace.levels) - 1, "vc0": d, "vc": after["vc"], "ldim0": l, "ldim": after["ldim"],
                     "thr0": base["thr"], "thr": after["thr"], "claim": claim, "ok": ok})
    return rows


def _extraction_row(index, kind, graph, subset, eps, m, procedure, out, expect):
    if out.found_set:
        ws = WeightedSet.uniform(out.subset)
        if procedure == "good":
            valid = is_good(graph, ws, eps)
        else:
            valid = is_excellent(graph, ws, eps)
        bound = size_bound_met(len(out.subset), len(subset), eps, m)
        result, size = "set", len(out.subset)
    else:
        valid = not tree_violations(out.tree, GraphHost(graph))
        bound, result, size = True, "tree", out.tree.height
    ok = valid and bound and result == expect
    return {"trial": index, "kind": kind, "n": len(graph), "eps": format_rational(eps), "m": m,
            "procedure": procedure, "result": result, "size": size, "bound_ok": bound, "valid": valid, "ok": ok}


def _trial_extraction(seed: int, index: int) -> list:
    rng = _rng(_trial_seed(seed, index))
    rows = []
    graph = gen_random_stable_graph(rng.randint(6, 9), 4, rng.randrange(1 << 30), Fraction(1, 4))
    m = D.ldim(class_from_graph(graph)) + 1
    everything = list(range(len(graph)))
    eps_good = Fraction(1, 5)
    rows.append(_extraction_row(index, "stable", graph, everything, eps_good, m, "good",
                                extract_good(graph, everything, eps_good, m), "set"))
    eps_exc = Fraction(1, (1 << m) + 1)
    rows.append(_extraction_row(index, "stable", graph, everything, eps_exc, m, "excellent",
                                extract_excellent(graph, everything, eps_exc, m), "set"))
    hg = gen_halfgraph(16, rng.randrange(1 << 30), Fraction(1, 3))
    b_side = halfgraph_sides(hg)[1]
    rows.append(_extraction_row(index, "planted", hg, b_side, Fraction(1, 10), 2, "good",
                                extract_good(hg, b_side, Fraction(1, 10), 2), "tree"))
    hg6 = gen_halfgraph(6)
    b6 = halfgraph_sides(hg6)[1]
    rows.append(_extraction_row(index, "planted", hg6, b6, Fraction(1, 5), 2, "excellent",
                                extract_excellent(hg6, b6, Fraction(1, 5), 2), "tree"))
    return rows


TRIALS = {
    "preservation": _trial_preservation,
    "backtrack": _trial_backtrack,
    "duality": _trial_duality,
    "symmetry": _trial_symmetry,
    "regimes": _trial_regimes,
    "extraction": _trial_extraction,
}


def run_suite(name: str, seed: int = 0, trials: int | None = None, jobs: int = 1) -> list:
    """Run a verification suite; rows come back ordered by trial index."""
    if name not in TRIALS:
        raise SatlabError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    trials = DEFAULT_TRIALS[name] if trials is None else trials
    fn = TRIALS[name]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(fn, [seed] * trials, range(trials)))
    else:
        chunks = [fn(seed, i) for i in range(trials)]
    return [row for chunk in chunks for row in chunk]


# ---------------------------------------------------------------- output

def _render(rows: list, columns: list, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: row.get(c) for c in columns} for row in rows], indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _as_class(instance):
    return class_from_graph(instance) if isinstance(instance, Graph) else instance


def cmd_dims(args) -> int:
    instance = load_instance(args.input)
    cls = _as_class(instance)
    report = D.all_dims(cls)
    row = {"kind": "graph" if isinstance(instance, Graph) else "class", "points": cls.n_points,
           "functions": len(cls), **report}
    if args.witness:
        tree = D.find_mistake_tree(cls, max(report["ldim"], 0))
        row["mistake_tree"] = json.dumps(tree.to_json()) if tree is not None else ""
        row["threshold"] = json.dumps(D.find_threshold_pattern(cls).to_json())
    _emit(_render([row], list(row), args.format), None)
    return 0


def cmd_saturate(args) -> int:
    instance = load_instance(args.input)
    eps = parse_rational(args.eps)
    if isinstance(instance, Graph):
        trace = graph_saturate(instance, eps, args.max_levels)
        rows = []
        for n, g in enumerate(trace.levels):
            c = class_from_graph(g)
            rows.append({"level": n, "size": len(g), "vc": D.vc_dim(c), "ldim": D.ldim(c), "thr": D.thr_dim(c)})
    else:
        trace = saturate(instance, eps, args.max_levels)
        rows = [{"level": n, "size": len(c), "vc": D.vc_dim(c), "ldim": D.ldim(c), "thr": D.thr_dim(c)}
                for n, c in enumerate(trace.levels)]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(trace.to_json(), fh, indent=1)
    _emit(_render(rows, ["level", "size", "vc", "ldim", "thr"], args.format), None)
    if not trace.reached_fixpoint:
        print(f"level cap {args.max_levels} reached before a fixpoint", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    rows = run_suite(args.suite, args.seed, args.trials, args.jobs)
    _emit(_render(rows, COLUMNS[args.suite], args.format), args.out)
    bad = sum(1 for r in rows if not r["ok"])
    print(f"{args.suite}: {len(rows)} rows, {bad} violations", file=sys.stderr)
    return 1 if bad else 0


def cmd_example(args) -> int:
    instance, eps = example_instance(args.name, args.seed, args.k)
    _emit(json.dumps(instance.to_json(), indent=1) + "\n", args.out)
    print(f"suggested eps: {format_rational(eps)}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="satlab", description="Exact saturation experiments for classes and graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dims", help="VC, Littlestone, threshold and dual dimensions")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--witness", action="store_true", help="also emit a mistake tree and threshold witness")
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("saturate", help="iterate saturation to a fixpoint")
    p.add_argument("--input", required=True)
    p.add_argument("--eps", required=True, help="exact rational p/q")
    p.add_argument("--max-levels", type=int, default=16)
    p.add_argument("--out", help="trace JSON path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_saturate)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", required=True, choices=SUITES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int)
    p.add_argument("--out", help="report path (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example", help="emit an example instance as JSON")
    p.add_argument("--name", required=True, choices=EXAMPLE_NAMES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=2, help="chain length for kchain")
    p.add_argument("--out")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SatlabError as exc:
        print(f"satlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
