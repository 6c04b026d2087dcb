"""JSON encoding of automata.

Common fields: ``model``, ``alphabet``, ``states`` (``[{"id", "role"}]``) and
``initial``.  Transition data depends on the model:

``prob``
    ``{symbol: {state: {target: "num/den"}}}``
``dh-pra``
    same shape, listing every column of the doubly stochastic matrix
``mm-qfa``
    ``{symbol: [[row, col, [re, im]], ...]}``, sparse entries indexed by
    position in ``states``
``mm-bqfa``
    ``{symbol: [kraus_1, kraus_2, ...]}`` with each Kraus operator in the
    sparse ``mm-qfa`` form
"""
from __future__ import annotations

import json

import numpy as np
import scipy.sparse as sp

from .automata import DhPra, Mmqfa, ProbAutomaton, StatePartition
from .band import Alphabet
from .errors import InputError, ValidationError
from .quantum import CpMap, MmBqfa
from .rational import fmt_q, parse_q


def _sparse_entries(M) -> list:
    C = sp.coo_matrix(M)
    order = np.lexsort((C.row, C.col))
    return [
        [int(C.row[k]), int(C.col[k]), [float(C.data[k].real), float(C.data[k].imag)]]
        for k in order
        if C.data[k] != 0
    ]


def _sparse_from(entries, n: int) -> sp.csr_matrix:
    try:
        rows = [int(e[0]) for e in entries]
        cols = [int(e[1]) for e in entries]
        vals = [complex(float(e[2][0]), float(e[2][1])) for e in entries]
    except (TypeError, ValueError, IndexError):
        raise InputError("sparse entries must be [row, col, [re, im]]") from None
    if any(not (0 <= r < n and 0 <= c < n) for r, c in zip(rows, cols)):
        raise InputError("sparse entry index out of range")
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex)


def automaton_to_dict(a) -> dict:
    part = a.partition
    out = {
        "model": a.model,
        "alphabet": list(a.alphabet.letters),
        "states": part.to_list(),
        "initial": part.initial,
    }
    names = part.states
    if isinstance(a, ProbAutomaton):
        out["transitions"] = {
            s: {q: {t: fmt_q(p) for t, p in dist.items()} for q, dist in table.items()}
            for s, table in a.transitions.items()
        }
    elif isinstance(a, DhPra):
        out["transitions"] = {
            s: {names[j]: {names[i]: fmt_q(p) for i, p in sorted(col.items())} for j, col in enumerate(cols)}
            for s, cols in a.columns.items()
        }
    elif isinstance(a, Mmqfa):
        out["transitions"] = {s: _sparse_entries(U) for s, U in a.unitaries.items()}
    elif isinstance(a, MmBqfa):
        out["transitions"] = {s: [_sparse_entries(K) for K in ch.kraus] for s, ch in a.channels.items()}
    else:
        raise TypeError(f"cannot serialize {type(a).__name__}")
    return out


def automaton_from_dict(data) -> object:
    if not isinstance(data, dict):
        raise InputError("automaton must be a JSON object")
    for key in ("model", "alphabet", "states", "initial", "transitions"):
        if key not in data:
            raise InputError(f"automaton is missing {key!r}")
    alphabet = Alphabet(tuple(data["alphabet"]))
    try:
        states = [s["id"] for s in data["states"]]
        roles = [s["role"] for s in data["states"]]
    except (TypeError, KeyError):
        raise InputError("states must be objects with 'id' and 'role'") from None
    try:
        part = StatePartition(states, roles, data["initial"])
    except ValidationError as exc:
        raise InputError(str(exc)) from None
    trans = data["transitions"]
    if not isinstance(trans, dict):
        raise InputError("transitions must be an object keyed by symbol")
    n = len(states)
    model = data["model"]
    try:
        if model == "prob":
            table = {
                s: {q: {t: parse_q(p) for t, p in dist.items()} for q, dist in t_s.items()}
                for s, t_s in trans.items()
            }
            return ProbAutomaton(alphabet, part, table)
        if model == "dh-pra":
            idx = part.index
            columns = {}
            for s, t_s in trans.items():
                cols = [None] * n
                for q, dist in t_s.items():
                    cols[idx[q]] = {idx[t]: parse_q(p) for t, p in dist.items()}
                if any(c is None for c in cols):
                    raise InputError(f"dh-pra matrix of {s!r} is missing columns")
                columns[s] = tuple(cols)
            return DhPra(alphabet, part, columns)
        if model == "mm-qfa":
            q = Mmqfa(alphabet, part, {s: _sparse_from(e, n) for s, e in trans.items()})
            err = q.unitarity_error()
            if err > 1e-9:
                raise InputError(f"mm-qfa transition matrices are not unitary (error {err:.2e})")
            return q
        if model == "mm-bqfa":
            return MmBqfa(alphabet, part, {s: CpMap([_sparse_from(k, n) for k in ks]) for s, ks in trans.items()})
    except KeyError as exc:
        raise InputError(f"unknown state {exc}") from None
    except ValidationError as exc:
        raise InputError(f"invalid automaton: {exc}") from None
    raise InputError(f"unknown model {model!r}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc})") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


__all__ = ["automaton_to_dict", "automaton_from_dict", "dumps", "load_json"]
