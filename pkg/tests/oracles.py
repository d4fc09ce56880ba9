"""Brute-force reference implementations used only by the tests.

They share no code with the package beyond the value types, and favour
obviousness over speed.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations


# ------------------------------------------------------------------ LP

def _solve_square(a, b):
    """Exact Gaussian elimination; None when singular."""
    n = len(a)
    m = [list(map(Fraction, row)) + [Fraction(rhs)] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def lp_vertex_oracle(num_vars, constraints, objective):
    """Optimum of a bounded program with x >= 0 by enumerating basic solutions.

    Returns ("infeasible", None) or ("optimal", value).
    """
    rows = []
    for coeffs, rel, bound in constraints:
        rows.append((list(coeffs), rel, Fraction(bound)))
    for j in range(num_vars):
        e = [0] * num_vars
        e[j] = -1
        rows.append((e, "<=", Fraction(0)))
    best = None
    for picked in combinations(range(len(rows)), num_vars):
        x = _solve_square([rows[i][0] for i in picked], [rows[i][2] for i in picked])
        if x is None:
            continue
        feasible = True
        for coeffs, rel, bound in rows:
            lhs = sum(Fraction(c) * v for c, v in zip(coeffs, x))
            if (rel == "<=" and lhs > bound) or (rel == ">=" and lhs < bound) or (rel == "=" and lhs != bound):
                feasible = False
                break
        if feasible:
            val = sum(Fraction(c) * v for c, v in zip(objective, x))
            best = val if best is None else max(best, val)
    return ("infeasible", None) if best is None else ("optimal", best)


def grid_slack_oracle(rows, eps, n_members, denominator=60):
    """max over grid weights of min over rows of (eps - row mass)."""
    eps = Fraction(eps)
    best = None

    def weights(k, left):
        if k == 1:
            yield (left,)
            return
        for a in range(left + 1):
            for rest in weights(k - 1, left - a):
                yield (a,) + rest

    for w in weights(n_members, denominator):
        masses = [sum(Fraction(w[i], denominator) for i in r) for r in rows]
        val = eps - max(masses) if masses else eps
        best = val if best is None else max(best, val)
    return best


# --------------------------------------------------------------- dimensions

def vc_oracle(hyps, n):
    if not hyps:
        return -1
    best = 0
    for size in range(1, n + 1):
        for s in combinations(range(n), size):
            if len({tuple(h[i] for i in s) for h in hyps}) == 2 ** size:
                best = size
    return best


def ldim_oracle(hyps, n):
    hyps = frozenset(hyps)
    if not hyps:
        return -1
    if len(hyps) == 1:
        return 0
    best = 0
    for x in range(n):
        zero = frozenset(h for h in hyps if h[x] == 0)
        one = hyps - zero
        if zero and one:
            best = max(best, 1 + min(ldim_oracle(zero, n), ldim_oracle(one, n)))
    return best


def thr_oracle(hyps, n):
    hyps = set(hyps)
    best = 0
    for length in range(1, min(n, len(hyps)) + 1):
        found = False
        for xs in permutations(range(n), length):
            if all(
                any(all(h[xs[j]] == (1 if i < j else 0) for j in range(length)) for h in hyps)
                for i in range(length)
            ):
                found = True
                break
        if found:
            best = length
        else:
            break
    return best


def k_realizable_oracle(hyps, f, k):
    n = len(f)
    for size in range(0, min(k, n) + 1):
        for s in combinations(range(n), size):
            if not any(all(h[i] == f[i] for i in s) for h in hyps):
                return False
    return True


def mono_height_oracle(height, coloring):
    """Largest monochromatic generalized subtree, by naive search over embeddings."""

    def exists(eta, color, t):
        if t == 0:
            return True
        if len(eta) == height:
            return False
        if coloring[eta] == color and exists(eta + "0", color, t - 1) and exists(eta + "1", color, t - 1):
            return True
        return exists(eta + "0", color, t) or exists(eta + "1", color, t)

    best = 0
    for color in (0, 1):
        t = 0
        while exists("", color, t + 1):
            t += 1
        best = max(best, t)
    return best


# ----------------------------------------------------------------- goodness

def grid_majorities(rows_masks, n, eps, denominator):
    """Majority functions of all grid-weighted sets over the given member masks."""
    eps = Fraction(eps)
    m = len(rows_masks)
    found = set()

    def weights(k, left):
        if k == 1:
            yield (left,)
            return
        for a in range(left + 1):
            for rest in weights(k - 1, left - a):
                yield (a,) + rest

    for w in weights(m, denominator):
        f = []
        for x in range(n):
            one = sum(Fraction(w[i], denominator) for i in range(m) if (rows_masks[i] >> x) & 1)
            zero = 1 - one
            if min(one, zero) >= eps:
                break
            f.append(1 if one > zero else 0)
        else:
            found.add(tuple(f))
    return found
