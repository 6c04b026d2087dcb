"""Recognizing automata built from a solution of the inequality system.

Given a consistent language ``L`` over ``A`` and a normalized solution
(``x0 = 0``, ``Y(A) = 0``, all other values in ``[0, 1/|A|]``), this module
builds

* the level automata ``A_i`` and their composite ``A``, a halting
  probabilistic automaton accepting ``u`` with probability ``L(tau(u))``;
* the reversible approximations ``S_{i,n}`` / ``S`` with doubly stochastic
  matrices;
* the unitary approximations ``U_{i,n}`` / ``U_n`` built from
  :func:`h_matrix`;
* the Birkhoff lift of a doubly stochastic automaton to Kraus channels.

Level ``j`` of the subset lattice holds the letter sets of size ``j``.  The
``i``-th component keeps levels ``0 .. i-1`` and decides on the first step
that leaves level ``i-1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .automata import END, START, DhPra, Mmqfa, ProbAutomaton, StatePartition
from .band import Alphabet, R1Language
from .errors import ConstructionError, InputError, SizeLimitError, ValidationError
from .system import P1, P2, VarKey, X, Y

ZERO = Fraction(0)
ONE = Fraction(1)


def alpha(m: int) -> int:
    """``lcm(1, ..., m)`` with ``alpha(0) = 0``."""
    if m < 0:
        raise InputError("alpha is defined for nonnegative integers")
    if m == 0:
        return 0
    return math.lcm(*range(1, m + 1))


def h_matrix(n: int) -> np.ndarray:
    """The unitary ``(2n-1) x (2n-1)`` mixing block.

    The top-left ``n x n`` block is the all-``1/n`` matrix ``M_n``.  With
    ``F_n[r, s] = exp(2 pi i r s / n) / sqrt(n)`` and ``V_n`` equal to ``F_n``
    without its first column, the full matrix is ``[[M_n, V_n], [V_n*, 0]]``.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InputError("h_matrix needs a positive integer")
    r = np.arange(n)
    F = np.exp(2j * np.pi * np.outer(r, r) / n) / math.sqrt(n)
    V = F[:, 1:]
    H = np.zeros((2 * n - 1, 2 * n - 1), dtype=complex)
    H[:n, :n] = 1.0 / n
    H[:n, n:] = V
    H[n:, :n] = V.conj().T
    return H


def dft_matrix(n: int) -> np.ndarray:
    r = np.arange(n)
    return np.exp(2j * np.pi * np.outer(r, r) / n) / math.sqrt(n)


# --------------------------------------------------------------------------
# solution access


def _values(L: R1Language, solution) -> dict:
    """Accept a witness dict (or an object with a ``witness`` attribute)."""
    w = getattr(solution, "witness", solution)
    if not isinstance(w, Mapping):
        raise InputError("solution must map variables to rationals")
    out = {}
    for k, v in w.items():
        key = VarKey.parse(k, L.alphabet) if isinstance(k, str) else k
        out[key] = Fraction(v)
    return out


def _scaled(sol: dict, key: VarKey, size: int) -> Fraction:
    p = size * sol.get(key, ZERO)
    if not 0 <= p <= 1:
        raise ConstructionError(
            f"scaled value {p} of {key.kind}-variable is outside [0, 1]; "
            "the solution is not normalized"
        )
    return p


def _levels(alphabet: Alphabet) -> list[list[frozenset]]:
    by = [[] for _ in range(len(alphabet) + 1)]
    for s in alphabet.subsets():
        by[len(s)].append(s)
    return by


def _check_level(L: R1Language, i: int) -> None:
    if not isinstance(i, int) or not 1 <= i <= len(L.alphabet):
        raise InputError(f"component index must lie in 1..{len(L.alphabet)}, got {i!r}")


# --------------------------------------------------------------------------
# probabilistic automata


def _level_tables(L, sol, i, prefix, states, roles, trans):
    a = L.alphabet
    fmt = a.format_set
    size = len(a)
    levels = _levels(a)
    top = i - 1
    for j in range(top + 1):
        for s in levels[j]:
            states.append(f"{prefix}{fmt(s)}")
            roles.append("non")
    for j in range(top + 1):
        for s in levels[j]:
            q = f"{prefix}{fmt(s)}"
            if j < top:
                for c in a.letters:
                    trans[c][q] = {f"{prefix}{fmt(s | {c})}": ONE}
                rej = f"{q}$:rej"
                states.append(rej)
                roles.append("rej")
                trans[END][q] = {rej: ONE}
                continue
            for c in [*a.letters, END]:
                if c in s:
                    trans[c][q] = {q: ONE}
                    continue
                p = _scaled(sol, Y(s) if c == END else X(s, c), size)
                acc, rej = f"{q}{c}:acc", f"{q}{c}:rej"
                states.extend([acc, rej])
                roles.extend(["acc", "rej"])
                dist = {}
                if p:
                    dist[acc] = p
                if p != 1:
                    dist[rej] = ONE - p
                trans[c][q] = dist


def build_level_automaton(L: R1Language, solution, i: int) -> ProbAutomaton:
    """The ``i``-th level automaton ``A_i`` (no ``#`` transition)."""
    _check_level(L, i)
    sol = _values(L, solution)
    states, roles = [], []
    trans = {c: {} for c in [*L.alphabet.letters, END]}
    _level_tables(L, sol, i, f"A{i}/", states, roles, trans)
    part = StatePartition(states, roles, f"A{i}/{{}}")
    return ProbAutomaton(L.alphabet, part, trans)


def build_composite(L: R1Language, solution) -> ProbAutomaton:
    """``#`` picks one of ``A_1 .. A_|A|`` uniformly at random."""
    if len(L.alphabet) == 0:
        raise InputError("the composite automaton needs a nonempty alphabet")
    sol = _values(L, solution)
    k = len(L.alphabet)
    states, roles = ["start"], ["non"]
    trans = {c: {} for c in [START, *L.alphabet.letters, END]}
    for i in range(1, k + 1):
        _level_tables(L, sol, i, f"A{i}/", states, roles, trans)
    trans[START]["start"] = {f"A{i}/{{}}": Fraction(1, k) for i in range(1, k + 1)}
    return ProbAutomaton(L.alphabet, StatePartition(states, roles, "start"), trans)


# --------------------------------------------------------------------------
# replicated layouts shared by the reversible and unitary constructions


class _Layout:
    def __init__(self):
        self.states: list[str] = []
        self.roles: list[str] = []
        self.index: dict[str, int] = {}

    def add(self, name: str, role: str) -> int:
        self.index[name] = len(self.states)
        self.states.append(name)
        self.roles.append(role)
        return self.index[name]


@dataclass
class _Component:
    """Index bookkeeping for one replicated level automaton."""

    i: int
    copies: list  # copies[j] = number of copies of each level-j set
    node: dict  # (set, k) -> state index, k is 1-based
    prime: dict  # (set, k) -> index of the primed twin
    low_rej: dict  # (set, k) -> index of the "$ rejects" state
    halt: dict  # (set, symbol, k) -> (acc index, rej index)
    initial: int


def _replicated(layout: _Layout, alphabet: Alphabet, i: int, per_step: int, prefix: str, primes: bool):
    fmt = alphabet.format_set
    levels = _levels(alphabet)
    top = i - 1
    copies = [per_step**j for j in range(top + 1)]
    comp = _Component(i, copies, {}, {}, {}, {}, -1)
    for j in range(top + 1):
        for s in levels[j]:
            for k in range(1, copies[j] + 1):
                comp.node[s, k] = layout.add(f"{prefix}{fmt(s)}#{k}", "non")
            if primes and j > 0:
                for k in range(1, copies[j] + 1):
                    comp.prime[s, k] = layout.add(f"{prefix}{fmt(s)}'#{k}", "rej")
            if j < top:
                for k in range(1, copies[j] + 1):
                    comp.low_rej[s, k] = layout.add(f"{prefix}{fmt(s)}$:rej#{k}", "rej")
            else:
                for c in [*alphabet.letters, END]:
                    if c in s:
                        continue
                    for k in range(1, copies[j] + 1):
                        acc = layout.add(f"{prefix}{fmt(s)}{c}:acc#{k}", "acc")
                        rej = layout.add(f"{prefix}{fmt(s)}{c}:rej#{k}", "rej")
                        comp.halt[s, c, k] = (acc, rej)
    comp.initial = comp.node[frozenset(), 1]
    return comp


def _count_component(size: int, i: int, per_step: int, primes: bool) -> int:
    total = 0
    for j in range(i):
        sets = math.comb(size, j)
        c = sets * per_step**j
        total += c
        if primes and j > 0:
            total += c
        if j < i - 1:
            total += c
        else:
            total += 2 * (size - j + 1) * c
    return total


def qfa_exponent(size: int, i: int) -> int:
    """The replication exponent ``c`` of the ``i``-th unitary component."""
    return 0 if i == 1 else alpha(size - 1) // (i - 1)


def count_states(size: int, n: int, model: str) -> int:
    """Number of states of the composite automaton for ``|A| = size``."""
    if model == "prob":
        return 1 + sum(_count_component(size, i, 1, False) for i in range(1, size + 1))
    if model in ("dh-pra", "mm-bqfa"):
        return sum(_count_component(size, i, n, False) for i in range(1, size + 1))
    if model == "mm-qfa":
        return sum(
            _count_component(size, i, n ** qfa_exponent(size, i), True) for i in range(1, size + 1)
        )
    raise InputError(f"unknown model {model!r}")


def _guard(size, n, model, max_states):
    if max_states is not None:
        total = count_states(size, n, model)
        if total > max_states:
            raise SizeLimitError(f"{model} automaton with n={n} has {total} states (limit {max_states})")


# --------------------------------------------------------------------------
# doubly stochastic construction


def _dhpra_blocks(L, sol, comp: _Component, n: int, cols: dict) -> None:
    """Write the non-identity columns of one component into ``cols``."""
    a = L.alphabet
    size = len(a)
    levels = _levels(a)
    top = comp.i - 1
    w = Fraction(1, n + 1)
    for c in a.letters:
        out = cols[c]
        for j in range(top):
            for s in levels[j]:
                if c in s:
                    continue
                t = s | {c}
                for k in range(1, comp.copies[j] + 1):
                    cluster = [comp.node[s, k]]
                    cluster += [comp.node[t, (k - 1) * n + m] for m in range(1, n + 1)]
                    for q in cluster:
                        out[q] = {r: w for r in cluster}
    for c in [*a.letters, END]:
        out = cols[c]
        for s in levels[top]:
            if c in s:
                continue
            r1 = _scaled(sol, Y(s) if c == END else X(s, c), size)
            r2 = ONE - r1
            for k in range(1, comp.copies[top] + 1):
                q = comp.node[s, k]
                acc, rej = comp.halt[s, c, k]
                out[q] = {i: p for i, p in ((acc, r1), (rej, r2)) if p}
                out[acc] = {i: p for i, p in ((acc, r2), (rej, r1)) if p}
                out[rej] = {q: ONE}
    out = cols[END]
    for (s, k), r in comp.low_rej.items():
        q = comp.node[s, k]
        out[q] = {r: ONE}
        out[r] = {q: ONE}


def _finish_columns(cols: dict, n_states: int) -> dict:
    return {a: tuple(col.get(j, {j: ONE}) for j in range(n_states)) for a, col in cols.items()}


def build_dhpra_level(L: R1Language, solution, i: int, n: int, max_states=None) -> DhPra:
    """The replicated component ``S_{i,n}`` on its own (``#`` is the identity)."""
    _check_level(L, i)
    _check_n(n)
    if max_states is not None:
        total = _count_component(len(L.alphabet), i, n, False)
        if total > max_states:
            raise SizeLimitError(f"S_{i},{n} has {total} states (limit {max_states})")
    sol = _values(L, solution)
    layout = _Layout()
    comp = _replicated(layout, L.alphabet, i, n, f"S{i}/", primes=False)
    cols = {c: {} for c in [*L.alphabet.letters, END]}
    _dhpra_blocks(L, sol, comp, n, cols)
    part = StatePartition(layout.states, layout.roles, layout.states[comp.initial])
    return DhPra(L.alphabet, part, _finish_columns(cols, len(layout.states)))


def build_dhpra(L: R1Language, solution, n: int, max_states=None) -> DhPra:
    """Composite reversible automaton ``S``: ``#`` mixes the components uniformly."""
    _check_n(n)
    size = len(L.alphabet)
    if size == 0:
        raise InputError("the composite automaton needs a nonempty alphabet")
    _guard(size, n, "dh-pra", max_states)
    sol = _values(L, solution)
    layout = _Layout()
    comps = [_replicated(layout, L.alphabet, i, n, f"S{i}/", primes=False) for i in range(1, size + 1)]
    cols = {c: {} for c in [START, *L.alphabet.letters, END]}
    for comp in comps:
        _dhpra_blocks(L, sol, comp, n, cols)
    heads = [c.initial for c in comps]
    w = Fraction(1, size)
    for q in heads:
        cols[START][q] = {r: w for r in heads}
    part = StatePartition(layout.states, layout.roles, layout.states[heads[0]])
    return DhPra(L.alphabet, part, _finish_columns(cols, len(layout.states)))


def _check_n(n):
    if not isinstance(n, int) or n < 1:
        raise InputError(f"replication parameter n must be a positive integer, got {n!r}")


# --------------------------------------------------------------------------
# unitary construction


def _halt_unitary(u1: float) -> np.ndarray:
    a, b = math.sqrt(u1), math.sqrt(max(0.0, 1.0 - u1))
    return np.array([[0, 0, 1], [a, b, 0], [b, -a, 0]], dtype=complex)


def _mmqfa_blocks(L, sol, comp: _Component, n: int, entries: dict) -> None:
    a = L.alphabet
    size = len(a)
    levels = _levels(a)
    top = comp.i - 1
    N = n ** qfa_exponent(size, comp.i)
    scale = Fraction(1, n ** alpha(size - 1)) if comp.i == 1 else ONE
    H = h_matrix(N + 1) if top > 0 else None
    for c in a.letters:
        out = entries[c]
        for j in range(top):
            for s in levels[j]:
                if c in s:
                    continue
                t = s | {c}
                for k in range(1, comp.copies[j] + 1):
                    idx = [comp.node[s, k]]
                    grp = [(k - 1) * N + m for m in range(1, N + 1)]
                    idx += [comp.node[t, g] for g in grp]
                    idx += [comp.prime[t, g] for g in grp]
                    out.append((idx, H))
    for c in [*a.letters, END]:
        out = entries[c]
        for s in levels[top]:
            if c in s:
                continue
            r1 = _scaled(sol, Y(s) if c == END else X(s, c), size)
            B = _halt_unitary(float(r1 * scale))
            for k in range(1, comp.copies[top] + 1):
                acc, rej = comp.halt[s, c, k]
                out.append(([comp.node[s, k], acc, rej], B))
    swap = np.array([[0, 1], [1, 0]], dtype=complex)
    for (s, k), r in comp.low_rej.items():
        entries[END].append(([comp.node[s, k], r], swap))


def _assemble(entries: list, n_states: int) -> sp.csr_matrix:
    """Block-sparse unitary: listed blocks, identity on untouched states."""
    rows, cols, vals = [], [], []
    touched = np.zeros(n_states, dtype=bool)
    for idx, B in entries:
        idx = np.asarray(idx)
        if touched[idx].any():
            raise ConstructionError("overlapping blocks in a transition matrix")
        touched[idx] = True
        rr, cc = np.nonzero(B)
        rows.append(idx[rr])
        cols.append(idx[cc])
        vals.append(B[rr, cc])
    free = np.flatnonzero(~touched)
    rows.append(free)
    cols.append(free)
    vals.append(np.ones(free.size, dtype=complex))
    r, c, v = (np.concatenate(x) for x in (rows, cols, vals))
    return sp.csr_matrix((v, (r, c)), shape=(n_states, n_states), dtype=complex)


def build_mmqfa_level(L: R1Language, solution, i: int, n: int, max_states=None) -> Mmqfa:
    """The unitary component ``U_{i,n}`` on its own (``#`` is the identity)."""
    _check_level(L, i)
    _check_n(n)
    size = len(L.alphabet)
    per = n ** qfa_exponent(size, i)
    if max_states is not None:
        total = _count_component(size, i, per, True)
        if total > max_states:
            raise SizeLimitError(f"U_{i},{n} has {total} states (limit {max_states})")
    sol = _values(L, solution)
    layout = _Layout()
    comp = _replicated(layout, L.alphabet, i, per, f"U{i}/", primes=True)
    entries = {c: [] for c in [*L.alphabet.letters, END]}
    _mmqfa_blocks(L, sol, comp, n, entries)
    m = len(layout.states)
    unitaries = {c: _assemble(e, m) for c, e in entries.items()}
    part = StatePartition(layout.states, layout.roles, layout.states[comp.initial])
    return Mmqfa(L.alphabet, part, unitaries)


def build_mmqfa(L: R1Language, solution, n: int, max_states=None) -> Mmqfa:
    """Composite unitary automaton ``U_n``; ``#`` applies the ``|A|``-point DFT."""
    _check_n(n)
    size = len(L.alphabet)
    if size == 0:
        raise InputError("the composite automaton needs a nonempty alphabet")
    _guard(size, n, "mm-qfa", max_states)
    sol = _values(L, solution)
    layout = _Layout()
    comps = [
        _replicated(layout, L.alphabet, i, n ** qfa_exponent(size, i), f"U{i}/", primes=True)
        for i in range(1, size + 1)
    ]
    entries = {c: [] for c in [START, *L.alphabet.letters, END]}
    for comp in comps:
        _mmqfa_blocks(L, sol, comp, n, entries)
    heads = [c.initial for c in comps]
    entries[START].append((heads, dft_matrix(size)))
    m = len(layout.states)
    unitaries = {c: _assemble(e, m) for c, e in entries.items()}
    part = StatePartition(layout.states, layout.roles, layout.states[heads[0]])
    return Mmqfa(L.alphabet, part, unitaries)


# --------------------------------------------------------------------------
# bound certificates used to pick n


def dhpra_certificate(gap_p1: Fraction, gap_p2: Fraction, size: int, n: int) -> float:
    """Lower bound on the recognition gap of ``S`` from the convergence bounds.

    With ``b = n/(n+1)``, members are accepted with probability at least
    ``b^(|A|-1) p2`` and non-members with probability at most ``p1`` plus the
    average of ``1 - b^(i-1)`` over the components.
    """
    b = n / (n + 1)
    slack = sum(1 - b ** (i - 1) for i in range(1, size + 1)) / size
    return b ** (size - 1) * float(gap_p2) - float(gap_p1) - slack


def mmqfa_certificate(gap_p1: Fraction, gap_p2: Fraction, size: int, n: int) -> float:
    """Lower bound on ``n^alpha`` times the recognition gap of ``U_n``."""
    lows, slack = [], 0.0
    for i in range(1, size + 1):
        if i == 1:
            lows.append(1.0)
            continue
        c = qfa_exponent(size, i)
        g = n**c / (n**c + 1)
        lows.append(g ** (2 * (i - 1)))
        slack += g ** (i - 1) - g ** (2 * (i - 1))
    return min(lows) * float(gap_p2) - float(gap_p1) - slack / size


def default_n(solution, size: int, model: str, limit: int = 2**20) -> int:
    """Smallest ``n`` in ``1, 2, 4, ...`` whose certificate is positive."""
    w = getattr(solution, "witness", solution)
    p1, p2 = Fraction(w.get(P1, 0)), Fraction(w.get(P2, 0))
    if p2 <= p1:
        raise ConstructionError("the solution has no positive gap")
    cert = mmqfa_certificate if model == "mm-qfa" else dhpra_certificate
    n = 1
    while n <= limit:
        if cert(p1, p2, size, n) > 0:
            return n
        n *= 2
    raise ConstructionError(f"no n up to {limit} certifies a positive gap")


# --------------------------------------------------------------------------
# Birkhoff decomposition and the channel lift


@dataclass(frozen=True)
class BirkhoffDecomposition:
    """Terms ``(weight, perm)``; ``perm[j]`` is the row hit by column ``j``."""

    terms: tuple
    size: int

    def reconstruct(self) -> list:
        B = [[ZERO] * self.size for _ in range(self.size)]
        for w, perm in self.terms:
            for j, i in enumerate(perm):
                B[i][j] += w
        return B


def _as_columns(matrix) -> list[dict]:
    """Normalize a dense matrix (rows = targets) or column dicts to column dicts."""
    if isinstance(matrix, DhPra):
        raise InputError("pass a single symbol's matrix, e.g. d.columns['a']")
    mat = list(matrix)
    if mat and isinstance(mat[0], dict):
        return [{i: Fraction(p) for i, p in col.items() if p} for col in mat]
    n = len(mat)
    cols = [dict() for _ in range(n)]
    for i, row in enumerate(mat):
        row = list(row)
        if len(row) != n:
            raise ValidationError("matrix is not square")
        for j, p in enumerate(row):
            p = Fraction(p)
            if p:
                cols[j][i] = p
    return cols


def _augment(start, adj, match_row, match_col):
    """Find an augmenting path from free column ``start`` (iterative DFS)."""
    parent = {start: None}
    stack = [(start, iter(adj[start]))]
    while stack:
        col, it = stack[-1]
        advanced = False
        for row in it:
            nxt = match_row.get(row)
            if nxt is None:
                # flip the path ending at this row
                c, r = col, row
                while c is not None:
                    prev_row = match_col.get(c)
                    match_col[c] = r
                    match_row[r] = c
                    c, r = parent[c], prev_row
                return True
            if nxt not in parent:
                parent[nxt] = col
                stack.append((nxt, iter(adj[nxt])))
                advanced = True
                break
        if not advanced:
            stack.pop()
    return False


def birkhoff(matrix) -> BirkhoffDecomposition:
    """Exact greedy decomposition into weighted permutation matrices.

    Repeatedly finds a perfect matching in the positive support (augmenting
    paths, reusing the previous matching) and subtracts the smallest matched
    entry.  Each step shrinks the support, so the face of the Birkhoff
    polytope containing the remainder drops in dimension and at most
    ``(n-1)^2 + 1`` terms appear.

    Parameters
    ----------
    matrix
        Square matrix as rows of rationals (rows index targets), or a list of
        column dicts as stored in :class:`DhPra`.

    Raises
    ------
    ValidationError
        If the input is not doubly stochastic.
    """
    cols = _as_columns(matrix)
    n = len(cols)
    rowsum = [ZERO] * n
    for j, col in enumerate(cols):
        s = ZERO
        for i, p in col.items():
            if not 0 <= i < n:
                raise ValidationError("row index out of range")
            if p < 0:
                raise ValidationError("negative entry")
            rowsum[i] += p
            s += p
        if s != 1:
            raise ValidationError(f"column {j} sums to {s}")
    if any(s != 1 for s in rowsum):
        raise ValidationError("a row does not sum to 1")

    rem = [dict(c) for c in cols]
    match_col: dict = {}
    match_row: dict = {}
    terms = []
    total = ZERO
    while total < 1:
        adj = [sorted(c) for c in rem]
        for j in range(n):
            if j not in match_col and not _augment(j, adj, match_row, match_col):
                raise ValidationError("support has no perfect matching; input not doubly stochastic")
        perm = tuple(match_col[j] for j in range(n))
        w = min(rem[j][perm[j]] for j in range(n))
        terms.append((w, perm))
        total += w
        for j in range(n):
            i = perm[j]
            left = rem[j][i] - w
            if left:
                rem[j][i] = left
            else:
                del rem[j][i]
                del match_col[j]
                del match_row[i]
    return BirkhoffDecomposition(tuple(terms), n)


def lift_to_bqfa(d: DhPra):
    """Kraus lift: each symbol becomes ``{sqrt(w_s) T_s}`` from its Birkhoff terms.

    On diagonal density matrices the lifted channel reproduces the classical
    doubly stochastic step exactly.
    """
    from .quantum import CpMap, MmBqfa

    n = len(d.partition)
    channels = {}
    for a, cols in d.columns.items():
        dec = birkhoff(cols)
        kraus = []
        for w, perm in dec.terms:
            T = sp.csr_matrix(
                (np.full(n, math.sqrt(w)), (np.asarray(perm), np.arange(n))), shape=(n, n), dtype=complex
            )
            kraus.append(T)
        channels[a] = CpMap(kraus)
    return MmBqfa(d.alphabet, d.partition, channels)
