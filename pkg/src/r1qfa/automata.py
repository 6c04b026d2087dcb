"""Automaton containers shared by the constructions and the simulators.

All models read ``# w $``: the start marker ``#`` followed by the word and
the end-marker ``$``.  States carry one of three roles, ``"non"``
(non-halting), ``"acc"`` or ``"rej"``.
"""
from __future__ import annotations

import copy
import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .band import Alphabet
from .errors import InputError, ValidationError

START = "#"
END = "$"
ROLES = ("non", "acc", "rej")


@dataclass(frozen=True)
class StatePartition:
    """Ordered states, their roles and the initial state."""

    states: tuple
    roles: tuple
    initial: str

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "roles", tuple(self.roles))
        if len(self.states) != len(self.roles):
            raise ValidationError("every state needs exactly one role")
        if len(set(self.states)) != len(self.states):
            raise ValidationError("state ids must be unique")
        for r in self.roles:
            if r not in ROLES:
                raise ValidationError(f"unknown role {r!r}")
        if self.initial not in self.index:
            raise ValidationError(f"initial state {self.initial!r} is not a state")
        if self.role(self.initial) != "non":
            raise ValidationError("the initial state must be non-halting")

    @cached_property
    def index(self) -> dict:
        return {q: i for i, q in enumerate(self.states)}

    def role(self, q: str) -> str:
        return self.roles[self.index[q]]

    def _with_role(self, role):
        return [q for q, r in zip(self.states, self.roles) if r == role]

    @property
    def non_halting(self) -> list:
        return self._with_role("non")

    @property
    def accepting(self) -> list:
        return self._with_role("acc")

    @property
    def rejecting(self) -> list:
        return self._with_role("rej")

    @cached_property
    def masks(self) -> dict:
        """Boolean masks over state indices, one per role."""
        r = np.array(self.roles)
        return {role: r == role for role in ROLES}

    def __len__(self) -> int:
        return len(self.states)

    def swapped(self) -> "StatePartition":
        flip = {"acc": "rej", "rej": "acc", "non": "non"}
        return StatePartition(self.states, tuple(flip[r] for r in self.roles), self.initial)

    def to_list(self) -> list:
        return [{"id": q, "role": r} for q, r in zip(self.states, self.roles)]


def _symbols(alphabet: Alphabet) -> set:
    return set(alphabet.letters) | {START, END}


@dataclass(frozen=True)
class ProbAutomaton:
    """Halting probabilistic automaton with exact rational transitions.

    ``transitions[symbol][state]`` is a dict ``{target: probability}``.  A
    symbol may be undefined on a state; halting states have no outgoing
    transitions at all.  A missing ``#`` table means ``#`` is ignored.
    """

    alphabet: Alphabet
    partition: StatePartition
    transitions: dict

    model = "prob"

    def __post_init__(self):
        syms = _symbols(self.alphabet)
        idx = self.partition.index
        for a, table in self.transitions.items():
            if a not in syms:
                raise ValidationError(f"transition symbol {a!r} is not in the alphabet")
            for q, dist in table.items():
                if q not in idx:
                    raise ValidationError(f"unknown state {q!r}")
                if self.partition.role(q) != "non":
                    raise ValidationError(f"halting state {q!r} has an outgoing transition")
                total = Fraction(0)
                for t, p in dist.items():
                    if t not in idx:
                        raise ValidationError(f"unknown target state {t!r}")
                    if not 0 <= p <= 1:
                        raise ValidationError(f"probability {p} out of range on {q!r} --{a}-> {t!r}")
                    total += p
                if total != 1:
                    raise ValidationError(f"distribution of {q!r} on {a!r} sums to {total}")

    def __len__(self):
        return len(self.partition)


@dataclass(frozen=True)
class DhPra:
    """Decide-and-halt automaton with doubly stochastic transitions.

    ``columns[symbol][j]`` is the dict ``{i: B[i, j]}`` of the column of the
    matrix ``B`` acting on column vectors, i.e. the distribution reached
    from state ``j``.  Symbols not present act as the identity.
    """

    alphabet: Alphabet
    partition: StatePartition
    columns: dict

    model = "dh-pra"

    def __post_init__(self):
        syms = _symbols(self.alphabet)
        n = len(self.partition)
        for a, cols in self.columns.items():
            if a not in syms:
                raise ValidationError(f"transition symbol {a!r} is not in the alphabet")
            if len(cols) != n:
                raise ValidationError(f"matrix of {a!r} has {len(cols)} columns, expected {n}")
            rowsum = [Fraction(0)] * n
            for j, col in enumerate(cols):
                s = Fraction(0)
                for i, p in col.items():
                    if not 0 <= p <= 1:
                        raise ValidationError(f"entry {p} of {a!r} out of range")
                    rowsum[i] += p
                    s += p
                if s != 1:
                    raise ValidationError(f"column {j} of {a!r} sums to {s}")
            bad = next((i for i, s in enumerate(rowsum) if s != 1), None)
            if bad is not None:
                raise ValidationError(f"row {bad} of {a!r} sums to {rowsum[bad]}")

    def __len__(self):
        return len(self.partition)

    def dense(self, symbol: str) -> list:
        """Exact matrix ``B`` (rows = targets) as a list of lists."""
        n = len(self.partition)
        B = [[Fraction(0)] * n for _ in range(n)]
        cols = self.columns.get(symbol)
        for j in range(n):
            if cols is None:
                B[j][j] = Fraction(1)
                continue
            for i, p in cols[j].items():
                B[i][j] = p
        return B

    @cached_property
    def float_matrices(self) -> dict:
        out = {}
        n = len(self.partition)
        for a, cols in self.columns.items():
            r, c, v = [], [], []
            for j, col in enumerate(cols):
                for i, p in col.items():
                    r.append(i)
                    c.append(j)
                    v.append(float(p))
            out[a] = sp.csr_matrix((v, (r, c)), shape=(n, n))
        return out


@dataclass(frozen=True)
class Mmqfa:
    """Measure-many quantum automaton: one unitary (sparse, complex) per symbol.

    ``unitaries[symbol]`` acts on column amplitude vectors.  Symbols not
    present act as the identity.
    """

    alphabet: Alphabet
    partition: StatePartition
    unitaries: dict

    model = "mm-qfa"

    def __post_init__(self):
        syms = _symbols(self.alphabet)
        n = len(self.partition)
        conv = {}
        for a, U in self.unitaries.items():
            if a not in syms:
                raise ValidationError(f"transition symbol {a!r} is not in the alphabet")
            U = sp.csr_matrix(U, dtype=complex)
            if U.shape != (n, n):
                raise ValidationError(f"unitary of {a!r} has shape {U.shape}, expected {(n, n)}")
            conv[a] = U
        object.__setattr__(self, "unitaries", conv)

    def __len__(self):
        return len(self.partition)

    def unitarity_error(self) -> float:
        """Largest entry of ``|U U* - I|`` over all symbols."""
        worst = 0.0
        n = len(self.partition)
        eye = sp.identity(n, dtype=complex, format="csr")
        for U in self.unitaries.values():
            D = (U @ U.conj().T - eye).tocoo()
            if D.nnz:
                worst = max(worst, float(np.abs(D.data).max()))
        return worst


def complement(automaton):
    """Swap accepting and rejecting states of any automaton model."""
    if dataclasses.is_dataclass(automaton):
        return dataclasses.replace(automaton, partition=automaton.partition.swapped())
    out = copy.copy(automaton)
    out.partition = automaton.partition.swapped()
    return out


def check_symbol(alphabet: Alphabet, a: str) -> None:
    if a not in _symbols(alphabet):
        raise InputError(f"symbol {a!r} is not in the alphabet")
