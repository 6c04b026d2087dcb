"""Independent reference implementations and generators used only by the tests.

Nothing here imports the solver or the search it cross-checks.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

from r1qfa.band import enumerate_band, is_band_word, tau
from r1qfa.forbidden import ForbiddenWitness


def _normalize(coeffs: dict, order: dict):
    items = sorted(((k, v) for k, v in coeffs.items() if v), key=lambda kv: order[kv[0]])
    if not items:
        return ()
    scale = abs(items[0][1])
    return tuple((k, v / scale) for k, v in items)


def fourier_motzkin_consistent(system) -> bool:
    """Feasibility of a homogeneous system with strict rows, by elimination.

    Each constraint is rewritten as ``f(x) >= 0`` or ``f(x) > 0``.  Variables
    are eliminated one at a time by pairing positive and negative
    occurrences; a combination is strict if either parent is.  The system is
    infeasible iff a row ``0 > 0`` appears.  There are no sign constraints,
    matching the raw system.
    """
    order = {v: i for i, v in enumerate(system.variables)}
    rows = {}

    def add(coeffs, strict):
        key = _normalize(coeffs, order)
        if not key:
            return not strict
        if rows.get(key) is True:
            return True
        rows[key] = strict or rows.get(key, False)
        return True

    for c in system.constraints:
        diff = {}
        for k, v in c.lhs.items():
            diff[k] = diff.get(k, 0) + Fraction(v)
        for k, v in c.rhs.items():
            diff[k] = diff.get(k, 0) - Fraction(v)
        if c.rel == "<=":
            diff = {k: -v for k, v in diff.items()}
        if c.rel == "<":
            diff = {k: -v for k, v in diff.items()}
        if not add(diff, c.rel == "<"):
            return False

    remaining = set(system.variables)
    while remaining:
        def cost(v):
            pos = sum(1 for r in rows if dict(r).get(v, 0) > 0)
            neg = sum(1 for r in rows if dict(r).get(v, 0) < 0)
            return pos * neg - pos - neg

        v = min(remaining, key=lambda x: (cost(x), order[x]))
        remaining.discard(v)
        pos, neg, rest = [], [], {}
        for r, strict in rows.items():
            d = dict(r)
            a = d.get(v, 0)
            if a > 0:
                pos.append((d, strict))
            elif a < 0:
                neg.append((d, strict))
            else:
                rest[r] = strict
        rows = rest
        for (p, sp_), (n, sn) in itertools.product(pos, neg):
            ap, an = p[v], -n[v]
            comb = {}
            for k in set(p) | set(n):
                if k == v:
                    continue
                comb[k] = an * p.get(k, 0) + ap * n.get(k, 0)
            if not add(comb, sp_ or sn):
                return False
    return True


def _cuts(word: str, n: int, allow_empty_final: bool):
    """All ways to cut ``word`` into ``n`` factors (only the last may be empty)."""
    L = len(word)
    for pos in itertools.combinations(range(1, L + 1), n - 1):
        bounds = (0, *pos, L)
        parts = tuple(word[bounds[i]:bounds[i + 1]] for i in range(n))
        if any(p == "" for p in parts[:-1]):
            continue
        if parts[-1] == "" and not allow_empty_final:
            continue
        yield parts


def naive_forbidden(L, max_m: int = 2, allow_empty_final: bool = False) -> bool:
    """Brute force over word subsets and all factorizations, small alphabets only."""
    words = enumerate_band(L.alphabet)
    acc = [w for w in words if w in L.accept]
    rej = [w for w in words if w not in L.accept]
    for m in range(1, max_m + 1):
        for n in range(2, len(L.alphabet) + 1):
            for A in itertools.combinations(acc, m):
                for R in itertools.combinations(rej, m):
                    ws = A + R
                    for cuts in itertools.product(*(list(_cuts(w, n, allow_empty_final)) for w in ws)):
                        if _conditions_hold(ws, cuts, m, n):
                            return True
    return False


def _conditions_hold(ws, cuts, m, n) -> bool:
    for k in range(n - 1):
        if len({frozenset(c[k]) for c in cuts}) != 1:
            return False
    for k in range(n):
        if sorted(c[k] for c in cuts[:m]) != sorted(c[k] for c in cuts[m:]):
            return False
    return all(is_band_word(w) for w in ws)


def constraint_sums_equal(w: ForbiddenWitness, expression_for) -> bool:
    """The accepted and rejected halves produce identical summed linear forms."""
    def total(words):
        acc = {}
        for x in words:
            for k, v in expression_for(tau(x)).items():
                acc[k] = acc.get(k, 0) + v
        return acc

    return total(w.words[: w.m]) == total(w.words[w.m:])


def random_doubly_stochastic(n, rng, terms=4):
    """A rational doubly stochastic matrix as a convex mix of permutations."""
    ws = [Fraction(rng.randint(1, 9)) for _ in range(terms)]
    total = sum(ws)
    M = [[Fraction(0)] * n for _ in range(n)]
    for w in ws:
        perm = list(range(n))
        rng.shuffle(perm)
        for j, i in enumerate(perm):
            M[i][j] += w / total
    return M
