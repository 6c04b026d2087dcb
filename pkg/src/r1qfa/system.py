"""The linear inequality system attached to an R1 language.

Every band word ``v = a1 a2 ... ak`` is assigned the linear form::

    L(v) = x0 + X(omega(v[0]), a1) + X(omega(v[1]), a2) + ... + X(omega(v[k-1]), ak) + Y(omega(v))

where ``v[i]`` is the prefix of length ``i``.  The variable ``X(s, a)`` is
the weight of reading a new letter ``a`` from the letter set ``s`` and
``Y(s)`` the weight of reading the end-marker from ``s``.  Accepted words
get the constraint ``L(v) >= p2``, the others ``L(v) <= p1``, and the
system closes with the strict ``p1 < p2``.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .band import Alphabet, R1Language, enumerate_band, is_band_word
from .errors import InputError
from .rational import fmt_q, parse_q

RELATIONS = (">=", "<=", "<", "==")


@dataclass(frozen=True)
class VarKey:
    """Structural name of a variable.

    ``kind`` is one of ``"x0"``, ``"x"``, ``"y"``, ``"p1"``, ``"p2"``.  For
    ``"x"`` keys ``letters`` is the prefix set and ``letter`` the new letter;
    for ``"y"`` keys ``letters`` is the full letter set.
    """

    kind: str
    letters: frozenset = frozenset()
    letter: str = ""

    def __post_init__(self):
        if self.kind not in ("x0", "x", "y", "p1", "p2"):
            raise InputError(f"unknown variable kind {self.kind!r}")
        object.__setattr__(self, "letters", frozenset(self.letters))
        if self.kind == "x" and (not self.letter or self.letter in self.letters):
            raise InputError("X keys need a letter outside the prefix set")

    def name(self, alphabet: Alphabet) -> str:
        if self.kind == "x":
            return f"x:{alphabet.format_set(self.letters)}|{self.letter}"
        if self.kind == "y":
            return f"y:{alphabet.format_set(self.letters)}"
        return self.kind

    @classmethod
    def parse(cls, text: str, alphabet: Alphabet) -> "VarKey":
        if text in ("x0", "p1", "p2"):
            return cls(text)
        if text.startswith("x:") and "|" in text:
            s, a = text[2:].rsplit("|", 1)
            alphabet.index(a)
            return cls("x", alphabet.parse_set(s), a)
        if text.startswith("y:"):
            return cls("y", alphabet.parse_set(text[2:]))
        raise InputError(f"cannot parse variable name {text!r}")


X0 = VarKey("x0")
P1 = VarKey("p1")
P2 = VarKey("p2")


def X(prefix, letter: str) -> VarKey:
    return VarKey("x", frozenset(prefix), letter)


def Y(letters) -> VarKey:
    return VarKey("y", frozenset(letters))


LinExpr = dict  # VarKey -> Fraction


def evaluate(expr: Mapping[VarKey, Fraction], assignment: Mapping[VarKey, Fraction]) -> Fraction:
    """Exact value of a linear form; absent variables count as 0."""
    return sum((Fraction(c) * Fraction(assignment.get(k, 0)) for k, c in expr.items()), Fraction(0))


@dataclass(frozen=True)
class Constraint:
    lhs: dict
    rel: str
    rhs: dict

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise InputError(f"unknown relation {self.rel!r}")

    def holds(self, assignment: Mapping[VarKey, Fraction]) -> bool:
        a, b = evaluate(self.lhs, assignment), evaluate(self.rhs, assignment)
        if self.rel == ">=":
            return a >= b
        if self.rel == "<=":
            return a <= b
        if self.rel == "<":
            return a < b
        return a == b

    def difference(self) -> dict:
        """``lhs - rhs`` as a single linear form."""
        out = dict(self.lhs)
        for k, c in self.rhs.items():
            out[k] = out.get(k, Fraction(0)) - c
        return {k: c for k, c in out.items() if c != 0}

    def to_dict(self, alphabet: Alphabet) -> dict:
        return {
            "lhs": _expr_to_dict(self.lhs, alphabet),
            "rel": self.rel,
            "rhs": _expr_to_dict(self.rhs, alphabet),
        }


def _expr_to_dict(expr, alphabet):
    order = {k: i for i, k in enumerate(canonical_variables(alphabet))}
    keys = sorted(expr, key=lambda k: order.get(k, len(order)))
    return {k.name(alphabet): fmt_q(expr[k]) for k in keys}


def canonical_variables(alphabet: Alphabet) -> list[VarKey]:
    """``x0``, every ``X(s, a)``, every ``Y(s)``, then ``p1`` and ``p2``."""
    subsets = alphabet.subsets()
    xs = [X(s, a) for s in subsets for a in alphabet.letters if a not in s]
    ys = [Y(s) for s in subsets]
    return [X0, *xs, *ys, P1, P2]


def expression_for(v: str, alphabet: Alphabet | None = None) -> dict:
    """The linear form ``L(v)`` of a band word, all coefficients 1.

    Examples
    --------
    >>> sorted(k.kind for k in expression_for(""))
    ['x0', 'y']
    """
    if alphabet is not None:
        alphabet.check_word(v)
    if not is_band_word(v):
        raise InputError(f"{v!r} repeats a letter")
    one = Fraction(1)
    expr = {X0: one}
    for i, a in enumerate(v):
        expr[X(v[:i], a)] = one
    expr[Y(v)] = one
    return expr


@dataclass(frozen=True)
class InequalitySystem:
    language: R1Language
    variables: tuple
    constraints: tuple
    words: tuple = field(default=())  # the band word behind each non-strict constraint

    @property
    def M(self) -> int:
        return len(self.language.alphabet) + 2

    def to_dict(self) -> dict:
        a = self.language.alphabet
        return {
            "language": self.language.to_dict(),
            "variables": [k.name(a) for k in self.variables],
            "constraints": [c.to_dict(a) for c in self.constraints],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def build_system(L: R1Language) -> InequalitySystem:
    a = L.alphabet
    words = enumerate_band(a)
    cons = []
    for v in words:
        if v in L.accept:
            cons.append(Constraint(expression_for(v), ">=", {P2: Fraction(1)}))
        else:
            cons.append(Constraint(expression_for(v), "<=", {P1: Fraction(1)}))
    cons.append(Constraint({P1: Fraction(1)}, "<", {P2: Fraction(1)}))
    return InequalitySystem(L, tuple(canonical_variables(a)), tuple(cons), tuple(words))


@dataclass(frozen=True)
class AssignmentReport:
    satisfied: tuple
    missing: tuple
    ok: bool

    @property
    def violated(self) -> list[int]:
        return [i for i, s in enumerate(self.satisfied) if not s]


def validate_assignment(sys: InequalitySystem, assignment: Mapping) -> AssignmentReport:
    """Check every constraint exactly.

    Values may be :class:`Fraction`, ``int`` or ``"num/den"`` strings and the
    keys may be :class:`VarKey` objects or their printed names.  Missing
    variables are read as 0 and reported with a :class:`UserWarning`.
    """
    a = sys.language.alphabet
    values = {}
    for k, val in assignment.items():
        key = VarKey.parse(k, a) if isinstance(k, str) else k
        values[key] = parse_q(val) if isinstance(val, str) else Fraction(val)
    missing = tuple(k for k in sys.variables if k not in values)
    if missing:
        names = ", ".join(k.name(a) for k in missing[:6])
        more = "" if len(missing) <= 6 else f" and {len(missing) - 6} more"
        warnings.warn(f"variables default to 0: {names}{more}", UserWarning, stacklevel=2)
    sat = tuple(c.holds(values) for c in sys.constraints)
    return AssignmentReport(sat, missing, all(sat))
