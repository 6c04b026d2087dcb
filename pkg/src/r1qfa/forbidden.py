"""Search for forbidden constructions in an R1 language.

A witness consists of ``m`` accepted and ``m`` rejected band words, each
cut into ``n`` consecutive factors.  For every column ``k < n`` all ``2m``
factors use the same letter set ``C_k`` (the sets are pairwise disjoint and
nonempty), and in every column the accepted half and the rejected half use
the same multiset of factors.  Such a configuration makes the constraint
sums of both halves identical, which rules out any solution with
``p1 < p2``.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

from .band import R1Language, enumerate_band, is_band_word, member
from .errors import InputError, SizeLimitError

DEFAULT_MAX_LETTERS = 6


@dataclass(frozen=True)
class ForbiddenWitness:
    """``words[:m]`` are accepted, ``words[m:]`` rejected; ``factors[i]`` cuts ``words[i]``."""

    n: int
    m: int
    words: tuple
    factors: tuple

    def columns(self) -> list[tuple[tuple, tuple]]:
        """Per column: (accepted factors, rejected factors)."""
        return [
            (tuple(f[k] for f in self.factors[: self.m]), tuple(f[k] for f in self.factors[self.m:]))
            for k in range(self.n)
        ]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "accepted": list(self.words[: self.m]),
            "rejected": list(self.words[self.m:]),
            "factors": [list(f) for f in self.factors],
        }

    @classmethod
    def from_dict(cls, data) -> "ForbiddenWitness":
        words = tuple(data["accepted"]) + tuple(data["rejected"])
        return cls(int(data["n"]), int(data["m"]), words, tuple(tuple(f) for f in data["factors"]))


def check_witness(L: R1Language, w: ForbiddenWitness, allow_empty_final: bool = False) -> bool:
    """Re-verify every condition of a witness from scratch."""
    n, m = w.n, w.m
    if m < 1 or n < 2 or len(w.words) != 2 * m or len(w.factors) != 2 * m:
        return False
    if any(len(f) != n for f in w.factors):
        return False
    try:
        for word in w.words:
            L.alphabet.check_word(word)
    except InputError:
        return False
    acc, rej = w.words[:m], w.words[m:]
    if len(set(acc)) != m or len(set(rej)) != m:
        return False
    if not all(member(L, x) for x in acc) or any(member(L, x) for x in rej):
        return False
    for word, f in zip(w.words, w.factors):
        if "".join(f) != word or not is_band_word(word):
            return False
        if any(not is_band_word(x) for x in f):
            return False
        if any(x == "" for x in f[:-1]):
            return False
        if f[-1] == "" and not allow_empty_final:
            return False
    for k in range(n - 1):
        if len({frozenset(f[k]) for f in w.factors}) != 1:
            return False
    for k in range(n):
        if Counter(f[k] for f in w.factors[:m]) != Counter(f[k] for f in w.factors[m:]):
            return False
    return True


def _match_other_side(cands, need: list[Counter], m: int):
    """Pick ``m`` distinct candidates whose column factors exhaust ``need``."""
    usable = [c for c in cands if all(need[k][x] > 0 for k, x in enumerate(c[1]))]
    chosen: list = []

    def rec(start):
        if len(chosen) == m:
            return all(not +cnt for cnt in need)
        for idx in range(start, len(usable)):
            word, parts = usable[idx]
            if all(need[k][x] > 0 for k, x in enumerate(parts)):
                for k, x in enumerate(parts):
                    need[k][x] -= 1
                chosen.append(usable[idx])
                if rec(idx + 1):
                    return True
                chosen.pop()
                for k, x in enumerate(parts):
                    need[k][x] += 1
        return False

    return list(chosen) if rec(0) else None


def _search_chain(acc, rej, n, max_m):
    for m in range(1, max_m + 1):
        if len(acc) < m or len(rej) < m:
            break
        small, big, small_is_acc = (acc, rej, True) if len(acc) <= len(rej) else (rej, acc, False)
        for combo in itertools.combinations(small, m):
            need = [Counter(parts[k] for _, parts in combo) for k in range(n)]
            other = _match_other_side(big, need, m)
            if other is not None:
                a_side, r_side = (list(combo), other) if small_is_acc else (other, list(combo))
                words = tuple(w for w, _ in a_side) + tuple(w for w, _ in r_side)
                factors = tuple(p for _, p in a_side) + tuple(p for _, p in r_side)
                return ForbiddenWitness(n, m, words, factors)
    return None


def find_forbidden(L: R1Language, max_m: int = 4, allow_empty_final: bool = False,
                   max_letters: int = DEFAULT_MAX_LETTERS):
    """Exhaustive search for a witness with ``2 <= n <= |A|`` and ``m <= max_m``.

    Chains of disjoint column letter sets are enumerated depth-first while
    the candidate word lists are narrowed column by column.  Within a chain,
    subsets of the smaller side are matched against the other side by
    backtracking on per-column factor counts.

    Returns
    -------
    ForbiddenWitness or None
    """
    a = L.alphabet
    if len(a) > max_letters:
        raise SizeLimitError(f"forbidden search is limited to {max_letters} letters (got {len(a)})")
    if max_m < 1:
        raise InputError("max_m must be positive")
    words = enumerate_band(a)
    subsets = [s for s in a.subsets() if s]
    for n in range(2, len(a) + 1):
        found = _dfs(L, words, [], 0, n, subsets, max_m, allow_empty_final)
        if found is not None:
            return found
    return None


def _dfs(L, pool, chain, offset, n, subsets, max_m, allow_empty_final):
    """Extend ``chain`` (column sets so far, total length ``offset``)."""
    if len(chain) == n - 1:
        acc, rej = [], []
        for w in pool:
            if len(w) == offset and not allow_empty_final:
                continue
            parts, pos = [], 0
            for c in chain:
                parts.append(w[pos:pos + len(c)])
                pos += len(c)
            parts.append(w[pos:])
            (acc if w in L.accept else rej).append((w, tuple(parts)))
        if not acc or not rej:
            return None
        return _search_chain(acc, rej, n, max_m)
    used = frozenset().union(*chain) if chain else frozenset()
    for s in subsets:
        if s & used:
            continue
        k = len(s)
        nxt = [w for w in pool if len(w) >= offset + k and frozenset(w[offset:offset + k]) == s]
        if not nxt:
            continue
        if not any(w in L.accept for w in nxt) or all(w in L.accept for w in nxt):
            continue
        found = _dfs(L, nxt, chain + [s], offset + k, n, subsets, max_m, allow_empty_final)
        if found is not None:
            return found
    return None
