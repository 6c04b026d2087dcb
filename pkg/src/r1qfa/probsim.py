"""Decide-and-halt simulation and interval-recognition reports.

Every model is driven through a small *stepper* object with ``start``,
``step`` and ``result`` methods.  Corpus simulation sorts the words and
walks them depth-first so that shared prefixes are simulated once.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .automata import END, START, DhPra, ProbAutomaton
from .band import R1Language, all_words, count_words, member
from .errors import SemanticsError, SizeLimitError
from .rational import fmt_q

log = logging.getLogger(__name__)

FLOAT_RESIDUAL_TOL = 1e-9
EXACT_STATE_LIMIT = 400
DEFAULT_MAX_WORDS = 10**6


@dataclass(frozen=True)
class HaltingDistribution:
    """Live mass per non-halting state plus accumulated accept/reject mass."""

    live: dict
    p_acc: object
    p_rej: object

    @property
    def residual(self):
        return sum(self.live.values(), type(self.p_acc)(0))

    def total(self):
        return self.residual + self.p_acc + self.p_rej

    def to_dict(self, word: str) -> dict:
        conv = fmt_q if isinstance(self.p_acc, Fraction) else float
        return {
            "word": word,
            "p_acc": conv(self.p_acc),
            "p_rej": conv(self.p_rej),
            "residual": conv(self.residual),
        }


_STEPPERS: dict = {}


def register_stepper(cls, factory: Callable) -> None:
    """Register ``factory(automaton, exact) -> stepper`` for a model class."""
    _STEPPERS[cls] = factory


def stepper_for(a, exact: bool | None = None):
    from . import quantum  # noqa: F401  (registers the quantum steppers)

    for cls, factory in _STEPPERS.items():
        if isinstance(a, cls):
            return factory(a, exact)
    raise TypeError(f"no simulator for {type(a).__name__}")


class _ProbStepper:
    def __init__(self, a: ProbAutomaton):
        self.a = a
        self.role = dict(zip(a.partition.states, a.partition.roles))

    def start(self):
        return {self.a.partition.initial: Fraction(1)}, Fraction(0), Fraction(0)

    def step(self, state, symbol):
        live, pa, pr = state
        table = self.a.transitions.get(symbol)
        if table is None:
            if symbol == START:
                return state
            raise SemanticsError(f"symbol {symbol!r} has no transitions")
        new: dict = {}
        for q, p in live.items():
            dist = table.get(q)
            if dist is None:
                raise SemanticsError(f"transition of {q!r} on {symbol!r} is undefined")
            for t, b in dist.items():
                mass = p * b
                r = self.role[t]
                if r == "acc":
                    pa += mass
                elif r == "rej":
                    pr += mass
                else:
                    new[t] = new.get(t, 0) + mass
        return new, pa, pr

    def result(self, state):
        live, pa, pr = state
        return HaltingDistribution({q: p for q, p in live.items() if p}, pa, pr)


class _DhPraExactStepper:
    def __init__(self, d: DhPra):
        self.d = d
        self.role = d.partition.roles

    def start(self):
        return {d_index(self.d): Fraction(1)}, Fraction(0), Fraction(0)

    def step(self, state, symbol):
        live, pa, pr = state
        cols = self.d.columns.get(symbol)
        if cols is None:
            return state
        new: dict = {}
        for j, p in live.items():
            for i, b in cols[j].items():
                new[i] = new.get(i, 0) + p * b
        out = {}
        for i, p in new.items():
            r = self.role[i]
            if r == "acc":
                pa += p
            elif r == "rej":
                pr += p
            elif p:
                out[i] = p
        return out, pa, pr

    def result(self, state):
        live, pa, pr = state
        names = self.d.partition.states
        return HaltingDistribution({names[i]: p for i, p in live.items() if p}, pa, pr)


class _DhPraFloatStepper:
    def __init__(self, d: DhPra):
        self.d = d
        self.mats = d.float_matrices
        m = d.partition.masks
        self.acc, self.rej, self.non = m["acc"], m["rej"], m["non"]

    def start(self):
        v = np.zeros(len(self.d.partition))
        v[d_index(self.d)] = 1.0
        return v, 0.0, 0.0

    def step(self, state, symbol):
        v, pa, pr = state
        B = self.mats.get(symbol)
        if B is None:
            return state
        v = B @ v
        pa += float(v[self.acc].sum())
        pr += float(v[self.rej].sum())
        return np.where(self.non, v, 0.0), pa, pr

    def result(self, state):
        v, pa, pr = state
        non = np.flatnonzero(self.non)
        names = self.d.partition.states
        return HaltingDistribution({names[i]: float(v[i]) for i in non if v[i] > 1e-15}, pa, pr)


def d_index(d) -> int:
    return d.partition.index[d.partition.initial]


def _dhpra_factory(d, exact):
    if exact is None:
        exact = len(d.partition) <= EXACT_STATE_LIMIT
    return _DhPraExactStepper(d) if exact else _DhPraFloatStepper(d)


register_stepper(ProbAutomaton, lambda a, exact: _ProbStepper(a))
register_stepper(DhPra, _dhpra_factory)


def _finish(out: HaltingDistribution, tol: float) -> HaltingDistribution:
    r = out.residual
    if isinstance(r, Fraction):
        if r != 0:
            raise SemanticsError(f"live mass {r} remains after the end-marker")
    elif r > tol:
        raise SemanticsError(f"live mass {r:.3e} remains after the end-marker")
    return out


def simulate(a, w: str, exact: bool | None = None) -> HaltingDistribution:
    """Run any supported automaton on ``# w $``."""
    a.alphabet.check_word(w)
    s = stepper_for(a, exact)
    st = s.start()
    for sym in (START, *w, END):
        st = s.step(st, sym)
    return _finish(s.result(st), FLOAT_RESIDUAL_TOL)


def run_prob(a: ProbAutomaton, w: str) -> HaltingDistribution:
    """Exact run of a halting probabilistic automaton on ``# w $``.

    Examples
    --------
    >>> from r1qfa import R1Language, decide_consistency, build_composite
    >>> L = R1Language.of("abc", ["ab"])
    >>> A = build_composite(L, decide_consistency(L))
    >>> run_prob(A, "aab").p_acc
    Fraction(2, 3)
    """
    return simulate(a, w, exact=True)


def run_dhpra(d: DhPra, w: str, exact: bool | None = None) -> HaltingDistribution:
    """Run a doubly stochastic automaton on ``# w $``.

    Exact rational arithmetic is used for automata with at most
    ``EXACT_STATE_LIMIT`` states unless ``exact`` says otherwise.
    """
    return simulate(d, w, exact=exact)


def _simulate_sorted(a, words: Sequence[str], exact) -> list:
    s = stepper_for(a, exact)
    out = []
    stack = [("", s.start())]
    st0 = s.step(stack[0][1], START)
    stack = [("", st0)]
    for w in words:
        while not w.startswith(stack[-1][0]):
            stack.pop()
        prefix, st = stack[-1]
        for c in w[len(prefix):]:
            st = s.step(st, c)
            prefix += c
            stack.append((prefix, st))
        out.append(_finish(s.result(s.step(st, END)), FLOAT_RESIDUAL_TOL))
    return out


def _worker(args):
    a, words, exact = args
    return _simulate_sorted(a, words, exact)


def accept_probabilities(a, words: Iterable[str], exact: bool | None = None, workers: int = 1) -> list:
    """Halting distributions for many words, sharing prefix computations.

    Results come back in the order of ``words``.  With ``workers > 1`` the
    sorted corpus is split into contiguous chunks run in separate processes.
    """
    words = list(words)
    for w in words:
        a.alphabet.check_word(w)
    order = sorted(range(len(words)), key=lambda i: words[i])
    sorted_words = [words[i] for i in order]
    if workers and workers > 1 and len(words) > 1:
        workers = min(workers, os.cpu_count() or 1, len(words))
    if workers and workers > 1 and len(words) > 1:
        chunk = -(-len(sorted_words) // workers)
        parts = [sorted_words[i:i + chunk] for i in range(0, len(sorted_words), chunk)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            res = [r for part in ex.map(_worker, [(a, p, exact) for p in parts]) for r in part]
    else:
        res = _simulate_sorted(a, sorted_words, exact)
    out = [None] * len(words)
    for i, r in zip(order, res):
        out[i] = r
    return out


@dataclass(frozen=True)
class RecognitionReport:
    """Interval recognition over a finite corpus.

    ``p1`` is the largest acceptance probability among tested non-members and
    ``p2`` the smallest among tested members (``None`` when a side is empty).
    Both are relative to the corpus; ``tau_exhaustive`` records when they
    coincide with the true values because acceptance depends only on
    ``tau(u)`` and every band word was tested.
    """

    words: tuple
    probabilities: tuple
    members: tuple
    p1: object
    p2: object
    verdict: bool
    tau_exhaustive: bool = False
    misclassified: tuple = field(default=())

    @property
    def gap(self):
        if self.p1 is None or self.p2 is None:
            return None
        return self.p2 - self.p1

    def to_dict(self, table: bool = True) -> dict:
        conv = lambda x: None if x is None else (fmt_q(x) if isinstance(x, Fraction) else float(x))
        d = {
            "corpus_size": len(self.words),
            "p1_sup_nonmembers": conv(self.p1),
            "p2_inf_members": conv(self.p2),
            "gap": conv(self.gap),
            "verdict": self.verdict,
            "corpus_relative": not self.tau_exhaustive,
            "tau_exhaustive": self.tau_exhaustive,
        }
        if table:
            d["table"] = [
                {"word": w, "member": m, "p_acc": conv(p)}
                for w, p, m in zip(self.words, self.probabilities, self.members)
            ]
        return d


def verify_recognition(a, L: R1Language, max_len: int | None = None, words: Iterable[str] | None = None,
                       exact: bool | None = None, workers: int = 1, max_words: int = DEFAULT_MAX_WORDS,
                       tau_invariant: bool = False) -> RecognitionReport:
    """Compare acceptance probabilities of members and non-members.

    Parameters
    ----------
    max_len : int, optional
        Test every word of length at most ``max_len``.
    words : iterable of str, optional
        Explicit corpus, used instead of ``max_len``.
    tau_invariant : bool
        Declare that the automaton's acceptance depends only on ``tau(u)``
        (true for the composite probabilistic automaton).  Combined with
        ``max_len >= |A|`` the reported interval is then exact.
    """
    if words is None:
        if max_len is None:
            raise ValueError("give max_len or an explicit word list")
        total = count_words(len(L.alphabet), max_len)
        if total > max_words:
            raise SizeLimitError(f"corpus of {total} words exceeds the cap {max_words}")
        words = list(all_words(L.alphabet, max_len))
    else:
        words = list(words)
    dists = accept_probabilities(a, words, exact=exact, workers=workers)
    probs = tuple(d.p_acc for d in dists)
    mem = tuple(member(L, w) for w in words)
    inside = [p for p, m in zip(probs, mem) if m]
    outside = [p for p, m in zip(probs, mem) if not m]
    p2 = min(inside) if inside else None
    p1 = max(outside) if outside else None
    verdict = p1 is None or p2 is None or p1 < p2
    exhaustive = bool(tau_invariant and max_len is not None and max_len >= len(L.alphabet))
    wrong = ()
    if not verdict:
        mid = (p1 + p2) / 2
        wrong = tuple(w for w, p, m in zip(words, probs, mem) if (m and p <= mid) or (not m and p >= mid))
    return RecognitionReport(tuple(words), probs, mem, p1, p2, verdict, exhaustive, wrong)
