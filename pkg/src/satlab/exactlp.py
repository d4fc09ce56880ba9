"""Exact rational linear programming.

A dense two-phase simplex over ``fractions.Fraction`` with Bland's rule, plus
the slack-maximisation program that decides strict majority representability.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import SatlabError, WeightedSet

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"
_RELATIONS = ("<=", "=", ">=")


@dataclass(frozen=True)
class LinearProgram:
    """Maximise ``objective . x`` subject to ``constraints``.

    Each constraint is ``(coeffs, relation, bound)`` with relation one of
    ``"<="``, ``"="`` or ``">="``. Variables are nonnegative unless their
    index is listed in ``free``.
    """

    num_vars: int
    constraints: tuple
    objective: tuple
    free: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if len(self.objective) != self.num_vars:
            raise SatlabError("objective length does not match variable count")
        for coeffs, rel, _ in self.constraints:
            if len(coeffs) != self.num_vars:
                raise SatlabError("constraint row length does not match variable count")
            if rel not in _RELATIONS:
                raise SatlabError(f"unknown relation {rel!r}")
        for j in self.free:
            if not 0 <= j < self.num_vars:
                raise SatlabError(f"free variable {j} out of range")

    @classmethod
    def build(cls, num_vars, constraints, objective, free=()):
        rows = tuple(
            (tuple(Fraction(c) for c in coeffs), rel, Fraction(bound)) for coeffs, rel, bound in constraints
        )
        return cls(num_vars, rows, tuple(Fraction(c) for c in objective), frozenset(free))


@dataclass(frozen=True)
class LPOutcome:
    status: str
    value: Fraction | None = None
    solution: tuple | None = None


def _pivot(rows, obj, r, c):
    pr = rows[r]
    pv = pr[c]
    if pv != 1:
        inv = 1 / pv
        pr = [x * inv for x in pr]
        rows[r] = pr
    nz = [(j, x) for j, x in enumerate(pr) if x]
    for i, row in enumerate(rows):
        if i != r:
            f = row[c]
            if f:
                for j, x in nz:
                    row[j] -= f * x
    f = obj[c]
    if f:
        for j, x in nz:
            obj[j] -= f * x


def _run_simplex(rows, obj, basis, allowed):
    """Bland-rule simplex on a tableau in canonical form.

    ``obj`` holds reduced costs (negative means improving) and the current
    objective value in its last slot. Returns False on unboundedness.
    """
    rhs = len(obj) - 1
    while True:
        enter = next((j for j in range(rhs) if allowed[j] and obj[j] < 0), None)
        if enter is None:
            return True
        best = None
        for i, row in enumerate(rows):
            a = row[enter]
            if a > 0:
                ratio = row[rhs] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return False
        _pivot(rows, obj, best[1], enter)
        basis[best[1]] = enter


def solve(lp: LinearProgram) -> LPOutcome:
    n = lp.num_vars
    # column map: original variable j -> (plus column, minus column or None)
    cols = []
    width = 0
    for j in range(n):
        if j in lp.free:
            cols.append((width, width + 1))
            width += 2
        else:
            cols.append((width, None))
            width += 1
    n_struct = width

    normalized = []
    for coeffs, rel, bound in lp.constraints:
        if bound < 0:
            coeffs = tuple(-c for c in coeffs)
            bound = -bound
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        normalized.append((coeffs, rel, bound))

    n_slack = sum(1 for _, rel, _ in normalized if rel != "=")
    n_art = sum(1 for _, rel, _ in normalized if rel != "<=")
    total = n_struct + n_slack + n_art
    rows, basis = [], []
    slack_at, art_at = n_struct, n_struct + n_slack
    artificial = set()
    for coeffs, rel, bound in normalized:
        row = [Fraction(0)] * (total + 1)
        for j, c in enumerate(coeffs):
            if c:
                p, m = cols[j]
                row[p] = c
                if m is not None:
                    row[m] = -c
        row[total] = bound
        if rel == "<=":
            row[slack_at] = Fraction(1)
            basis.append(slack_at)
            slack_at += 1
        else:
            if rel == ">=":
                row[slack_at] = Fraction(-1)
                slack_at += 1
            row[art_at] = Fraction(1)
            basis.append(art_at)
            artificial.add(art_at)
            art_at += 1
        rows.append(row)

    allowed = [True] * total
    if artificial:
        # phase 1: maximise -sum(artificials); reduced costs start at -sum of their rows
        obj = [Fraction(0)] * (total + 1)
        for i, b in enumerate(basis):
            if b in artificial:
                for j, x in enumerate(rows[i]):
                    if x:
                        obj[j] -= x
        for a in artificial:
            obj[a] = Fraction(0)
        _run_simplex(rows, obj, basis, allowed)
        if obj[total] != 0:
            return LPOutcome(INFEASIBLE)
        for a in artificial:
            allowed[a] = False
        i = 0
        while i < len(rows):
            if basis[i] in artificial:
                c = next((j for j in range(total) if allowed[j] and rows[i][j] != 0), None)
                if c is None:
                    del rows[i]
                    del basis[i]
                    continue
                _pivot(rows, [Fraction(0)] * (total + 1), i, c)
                basis[i] = c
            i += 1

    cost = [Fraction(0)] * total
    for j, c in enumerate(lp.objective):
        p, m = cols[j]
        cost[p] = c
        if m is not None:
            cost[m] = -c
    obj = [-c for c in cost] + [Fraction(0)]
    for i, b in enumerate(basis):
        cb = cost[b]
        if cb:
            for j, x in enumerate(rows[i]):
                if x:
                    obj[j] += cb * x
    if not _run_simplex(rows, obj, basis, allowed):
        return LPOutcome(UNBOUNDED)

    values = [Fraction(0)] * total
    for i, b in enumerate(basis):
        values[b] = rows[i][total]
    solution = tuple(values[p] - (values[m] if m is not None else 0) for p, m in cols)
    value = sum((c * x for c, x in zip(lp.objective, solution)), Fraction(0))
    return LPOutcome(OPTIMAL, value, solution)


def satisfies(lp: LinearProgram, x: Sequence) -> bool:
    """Exact feasibility check of a point."""
    if len(x) != lp.num_vars:
        return False
    for j, v in enumerate(x):
        if j not in lp.free and v < 0:
            return False
    for coeffs, rel, bound in lp.constraints:
        lhs = sum((c * v for c, v in zip(coeffs, x)), Fraction(0))
        if rel == "<=" and lhs > bound or rel == ">=" and lhs < bound or rel == "=" and lhs != bound:
            return False
    return True


def verify(lp: LinearProgram, outcome: LPOutcome) -> bool:
    """Re-check an optimal certificate by substitution: feasible and attains the value."""
    if outcome.status != OPTIMAL:
        return True
    x = outcome.solution
    if not satisfies(lp, x):
        return False
    return sum((c * v for c, v in zip(lp.objective, x)), Fraction(0)) == outcome.value


# ------------------------------------------------------------- slack program

def _reduce(rows, n_members):
    """Drop dominated members and redundant rows; both leave the optimum unchanged.

    A member whose row-support contains another member's support can be
    replaced by that member without increasing any row. A row that is a
    subset of another row is implied by it.
    """
    support = [0] * n_members
    for r, row in enumerate(rows):
        for i in row:
            support[i] |= 1 << r
    order = sorted(range(n_members), key=lambda i: (bin(support[i]).count("1"), i))
    keep, kept_supports = [], []
    for i in order:
        s = support[i]
        if not any(t & s == t for t in kept_supports):
            keep.append(i)
            kept_supports.append(s)
    keep.sort()
    keep_set = set(keep)
    shrunk = {frozenset(i for i in row if i in keep_set) for row in rows}
    maximal = [r for r in shrunk if not any(r < other for other in shrunk)]
    return keep, sorted(maximal, key=sorted)


def max_slack(rows, eps, n_members: int):
    """Maximise t subject to weights >= 0 summing to 1 and, for each row,
    (weight inside the row) + t <= eps.

    ``rows`` are iterables of member indices in ``range(n_members)``.
    Returns ``(slack, WeightedSet)`` when the optimum is positive and
    ``(slack, None)`` otherwise.
    """
    eps = Fraction(eps)
    if n_members <= 0:
        raise SatlabError("max_slack needs at least one member")
    rows = [frozenset(r) for r in rows]
    if not rows or all(not r for r in rows):
        return eps, (WeightedSet.singleton(0) if eps > 0 else None)
    keep, reduced = _reduce(rows, n_members)
    k = len(keep)
    # variables: weights for kept members, then the free slack t
    constraints = [([Fraction(1)] * k + [Fraction(0)], "=", Fraction(1))]
    pos = {m: p for p, m in enumerate(keep)}
    for r in reduced:
        coeffs = [Fraction(0)] * (k + 1)
        for i in r:
            coeffs[pos[i]] = Fraction(1)
        coeffs[k] = Fraction(1)
        constraints.append((coeffs, "<=", eps))
    lp = LinearProgram.build(k + 1, constraints, [0] * k + [1], free={k})
    out = solve(lp)
    if out.status != OPTIMAL:
        raise SatlabError(f"slack program unexpectedly {out.status}")
    slack = out.value
    if slack <= 0:
        return slack, None
    pairs = [(keep[p], w) for p, w in enumerate(out.solution[:k]) if w > 0]
    return slack, WeightedSet.of(pairs)
