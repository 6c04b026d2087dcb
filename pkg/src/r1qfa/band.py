"""Word combinatorics for the free left regular band.

Words are plain Python strings whose characters are letters of an
:class:`Alphabet`.  A *band word* is a word without repeated letters; the set
of band words over ``A`` is the free left regular band ``F(A)``, and the map
:func:`tau` (keep first occurrences) sends every word to its band word.
Letter sets are ``frozenset`` objects, ordered canonically by the alphabet's
declaration order whenever they need to be printed or enumerated.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import InputError, SizeLimitError

#: Characters that can never be letters: end-markers and the separators used
#: in variable and state names.
RESERVED = frozenset("#$,{}|:/'\"")

DEFAULT_MAX_LETTERS = 8

LetterSet = frozenset


@dataclass(frozen=True)
class Alphabet:
    """An ordered alphabet of distinct single-character letters.

    The declaration order is the total order used for sorting letters and
    for every canonical enumeration in the package.
    """

    letters: tuple[str, ...]

    def __post_init__(self):
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        seen = set()
        for c in letters:
            if not isinstance(c, str) or len(c) != 1:
                raise InputError(f"letters must be single characters, got {c!r}")
            if c in RESERVED or c.isspace():
                raise InputError(f"letter {c!r} is reserved")
            if c in seen:
                raise InputError(f"duplicate letter {c!r} in alphabet")
            seen.add(c)
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(letters)})

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[str]:
        return iter(self.letters)

    def __contains__(self, c) -> bool:
        return c in self._index

    def index(self, c: str) -> int:
        try:
            return self._index[c]
        except KeyError:
            raise InputError(f"symbol {c!r} is not in the alphabet {''.join(self.letters)!r}") from None

    @property
    def full(self) -> frozenset:
        return frozenset(self.letters)

    def check_word(self, w: str) -> str:
        """Return ``w`` unchanged, raising :class:`InputError` on a foreign symbol."""
        if not isinstance(w, str):
            raise InputError(f"words are strings, got {type(w).__name__}")
        for c in w:
            if c not in self._index:
                raise InputError(f"symbol {c!r} of word {w!r} is not in the alphabet")
        return w

    def sort_letters(self, letters: Iterable[str]) -> list[str]:
        return sorted(letters, key=self.index)

    def word_key(self, w: str) -> tuple:
        """Sort key giving the canonical order: by length, then lexicographic."""
        return (len(w), tuple(self.index(c) for c in w))

    def format_set(self, s: Iterable[str]) -> str:
        return "{" + ",".join(self.sort_letters(s)) + "}"

    def parse_set(self, text: str) -> frozenset:
        text = text.strip()
        if not (text.startswith("{") and text.endswith("}")):
            raise InputError(f"letter set must look like '{{a,b}}', got {text!r}")
        body = text[1:-1].strip()
        if not body:
            return frozenset()
        parts = [p.strip() for p in body.split(",")]
        for p in parts:
            self.index(p)
        if len(set(parts)) != len(parts):
            raise InputError(f"repeated letter in set {text!r}")
        return frozenset(parts)

    def subsets(self) -> list[frozenset]:
        """All subsets, ordered by size and then lexicographically."""
        out = []
        for k in range(len(self) + 1):
            out.extend(frozenset(c) for c in itertools.combinations(self.letters, k))
        return out


def as_alphabet(alphabet) -> Alphabet:
    if isinstance(alphabet, Alphabet):
        return alphabet
    if isinstance(alphabet, str):
        return Alphabet(tuple(alphabet))
    return Alphabet(tuple(alphabet))


def _alphabet_for(w: str, alphabet) -> Alphabet | None:
    if alphabet is None:
        return None
    a = as_alphabet(alphabet)
    a.check_word(w)
    return a


def omega(w: str, alphabet=None) -> frozenset:
    """Set of letters occurring in ``w``.

    Examples
    --------
    >>> sorted(omega("abab"))
    ['a', 'b']
    """
    _alphabet_for(w, alphabet)
    return frozenset(w)


def tau(w: str, alphabet=None) -> str:
    """Delete repeated letters of ``w``, keeping first occurrences.

    Examples
    --------
    >>> tau("aaaabbaabb")
    'ab'
    """
    _alphabet_for(w, alphabet)
    return "".join(dict.fromkeys(w))


def is_band_word(w: str) -> bool:
    return len(set(w)) == len(w)


def band_size(n: int) -> int:
    """``|F(A)|`` for ``|A| = n``: the number of duplicate-free words."""
    total, term = 1, 1
    for k in range(n):
        term *= n - k
        total += term
    return total


def enumerate_band(alphabet, max_letters: int = DEFAULT_MAX_LETTERS) -> list[str]:
    """All band words over ``alphabet`` in canonical order.

    Raises
    ------
    SizeLimitError
        If the alphabet has more than ``max_letters`` letters.
    """
    a = as_alphabet(alphabet)
    if len(a) > max_letters:
        raise SizeLimitError(
            f"alphabet of size {len(a)} exceeds the enumeration bound {max_letters} "
            f"(|F(A)| would be {band_size(len(a))})"
        )
    out = []
    for k in range(len(a) + 1):
        out.extend("".join(p) for p in itertools.permutations(a.letters, k))
    return out


def all_words(alphabet, max_len: int) -> Iterator[str]:
    """Every word of length at most ``max_len``, by length then lexicographically."""
    a = as_alphabet(alphabet)
    for k in range(max_len + 1):
        for t in itertools.product(a.letters, repeat=k):
            yield "".join(t)


def count_words(n_letters: int, max_len: int) -> int:
    return sum(n_letters**k for k in range(max_len + 1))


def theta_expand(v: str, l: int, m: int, alphabet=None) -> str:
    """Expand a band word into a long word with the same first-occurrence order.

    The first letter contributes ``a1^m``.  Each later prefix ``a1...ai``
    contributes ``l`` copies of the word that lists ``a1, ..., ai`` in
    alphabet order with every letter repeated ``m`` times.

    Parameters
    ----------
    v : str
        Nonempty band word.
    l, m : int
        Positive repetition counts.
    alphabet : optional
        Supplies the sorting order.  Defaults to the order of Python strings.

    Examples
    --------
    >>> theta_expand("ab", 2, 2)
    'aaaabbaabb'
    >>> theta_expand("ba", 1, 1)
    'bab'
    """
    if not isinstance(l, int) or not isinstance(m, int) or l < 1 or m < 1:
        raise InputError(f"theta_expand needs positive integers l, m (got {l!r}, {m!r})")
    if not v:
        raise InputError("theta_expand needs a nonempty band word")
    if not is_band_word(v):
        raise InputError(f"{v!r} has repeated letters")
    if alphabet is None:
        key = None
    else:
        a = as_alphabet(alphabet)
        a.check_word(v)
        key = a.index
    parts = [v[0] * m]
    for i in range(2, len(v) + 1):
        block = "".join(c * m for c in sorted(v[:i], key=key))
        parts.append(block * l)
    return "".join(parts)


def semilattice_levels(alphabet) -> dict[frozenset, int]:
    """Map each subset of the alphabet to its level (its cardinality)."""
    return {s: len(s) for s in as_alphabet(alphabet).subsets()}


@dataclass(frozen=True)
class R1Language:
    """A language given by its set of accepted band words.

    A word ``x`` belongs to the language iff ``tau(x)`` is in :attr:`accept`.
    """

    alphabet: Alphabet
    accept: frozenset

    def __post_init__(self):
        a = as_alphabet(self.alphabet)
        object.__setattr__(self, "alphabet", a)
        acc = self.accept
        if isinstance(acc, str):
            raise InputError("accept must be a collection of words, not a single string")
        acc = list(acc)
        for w in acc:
            a.check_word(w)
            if not is_band_word(w):
                raise InputError(f"accepted word {w!r} repeats a letter")
        if len(set(acc)) != len(acc):
            raise InputError("accepted words contain duplicates")
        object.__setattr__(self, "accept", frozenset(acc))

    @classmethod
    def of(cls, letters, accept: Iterable[str]) -> "R1Language":
        return cls(as_alphabet(letters), list(accept))

    def __contains__(self, x: str) -> bool:
        return member(self, x)

    def sorted_accept(self) -> list[str]:
        return sorted(self.accept, key=self.alphabet.word_key)

    def complement(self) -> "R1Language":
        rest = [v for v in enumerate_band(self.alphabet) if v not in self.accept]
        return R1Language(self.alphabet, rest)

    def to_dict(self) -> dict:
        return {"alphabet": list(self.alphabet.letters), "accept": self.sorted_accept()}

    @classmethod
    def from_dict(cls, data: Mapping) -> "R1Language":
        if not isinstance(data, Mapping):
            raise InputError("language must be a JSON object")
        missing = {"alphabet", "accept"} - set(data)
        if missing:
            raise InputError(f"language is missing field(s): {', '.join(sorted(missing))}")
        letters, accept = data["alphabet"], data["accept"]
        if not isinstance(letters, list) or not isinstance(accept, list):
            raise InputError("'alphabet' and 'accept' must be lists")
        return cls(Alphabet(tuple(letters)), accept)

    @classmethod
    def from_json(cls, text: str) -> "R1Language":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed JSON: {exc}") from None
        return cls.from_dict(data)


def member(L: R1Language, x: str) -> bool:
    """Membership test: ``tau(x)`` is an accepted band word."""
    L.alphabet.check_word(x)
    return tau(x) in L.accept
