import json

import numpy as np
import pytest

from r1qfa.band import R1Language, all_words
from r1qfa.construct import build_composite, build_dhpra, build_mmqfa, lift_to_bqfa
from r1qfa.errors import InputError
from r1qfa.lp import decide_consistency
from r1qfa.probsim import simulate
from r1qfa.serialize import automaton_from_dict, automaton_to_dict, load_json

L1 = R1Language.of("abc", ["ab"])
SOL1 = decide_consistency(L1)


@pytest.mark.parametrize("build", [
    lambda: build_composite(L1, SOL1),
    lambda: build_dhpra(L1, SOL1, 2),
    lambda: build_mmqfa(L1, SOL1, 2),
    lambda: lift_to_bqfa(build_dhpra(L1, SOL1, 1)),
])
def test_round_trip_preserves_behavior(build):
    a = build()
    b = automaton_from_dict(json.loads(json.dumps(automaton_to_dict(a))))
    assert b.model == a.model and b.partition == a.partition
    for w in all_words(L1.alphabet, 3):
        pa, pb = simulate(a, w).p_acc, simulate(b, w).p_acc
        if isinstance(pa, float) or isinstance(pb, float):
            assert float(pa) == pytest.approx(float(pb), abs=1e-12)
        else:
            assert pa == pb


def _good():
    return automaton_to_dict(build_mmqfa(R1Language.of("a", ["a"]), decide_consistency(R1Language.of("a", ["a"])), 1))


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("initial"),
    lambda d: d.update(model="dfa"),
    lambda d: d.update(states="nope"),
    lambda d: d.update(initial="missing"),
    lambda d: d["transitions"].update({"a": [[0, 0, [2.0, 0.0]]]}),
    lambda d: d["transitions"].update({"a": [[99, 0, [1.0, 0.0]]]}),
    lambda d: d["transitions"].update({"a": [["x"]]}),
])
def test_invalid_automata(mutate):
    d = _good()
    mutate(d)
    with pytest.raises(InputError):
        automaton_from_dict(d)


def test_not_an_object():
    with pytest.raises(InputError):
        automaton_from_dict([1, 2])


def test_load_json_errors(tmp_path):
    with pytest.raises(InputError):
        load_json(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(InputError):
        load_json(str(bad))


def test_dhpra_missing_column():
    S = build_dhpra(R1Language.of("a", ["a"]), decide_consistency(R1Language.of("a", ["a"])), 1)
    d = automaton_to_dict(S)
    first = next(iter(d["transitions"]))
    d["transitions"][first].pop(next(iter(d["transitions"][first])))
    with pytest.raises(InputError):
        automaton_from_dict(d)


def test_mmqfa_entries_sparse():
    d = _good()
    for entries in d["transitions"].values():
        for r, c, (re, im) in entries:
            assert isinstance(r, int) and isinstance(c, int)
            assert np.hypot(re, im) > 0
