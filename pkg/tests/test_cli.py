import json

import numpy as np
import pytest

from r1qfa.cli import main
from r1qfa.quantum import CpMap, haar_unitary, random_measurement


@pytest.fixture
def lang(tmp_path):
    def make(letters, accept, name="lang.json"):
        p = tmp_path / name
        p.write_text(json.dumps({"alphabet": list(letters), "accept": accept}))
        return str(p)
    return make


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _without_timings(text):
    d = json.loads(text)
    d.pop("timings", None)
    return d


class TestAnalyze:
    def test_inconsistent(self, capsys, lang):
        code, out, _ = run(capsys, "analyze", lang("abc", ["ab", "bac"]))
        assert code == 1
        d = json.loads(out)
        assert d["consistent"] is False and d["optimum"] == "0/1"

    def test_consistent(self, capsys, lang):
        code, out, _ = run(capsys, "analyze", lang("abc", ["ab"]))
        assert code == 0
        d = json.loads(out)
        assert d["optimum"] == "1/3" and d["witness"]["p2"] == "2/3"

    def test_with_forbidden(self, capsys, lang):
        code, out, _ = run(capsys, "analyze", lang("abcd", ["abc", "bad"]), "--forbidden")
        assert code == 1
        assert json.loads(out)["forbidden"]["found"] is True

    def test_deterministic(self, capsys, lang):
        f = lang("abc", ["ab", "c"])
        first = run(capsys, "analyze", f, "--forbidden")[1]
        second = run(capsys, "analyze", f, "--forbidden")[1]
        assert _without_timings(first) == _without_timings(second)

    def test_text_format(self, capsys, lang):
        code, out, _ = run(capsys, "analyze", lang("ab", ["ab"]), "--format", "text")
        assert code == 0 and "consistent: True" in out


class TestConstructSimulate:
    def test_round_trip(self, capsys, lang, tmp_path):
        auto = str(tmp_path / "a.json")
        code, out, err = run(capsys, "construct", lang("abc", ["ab"]), "--model", "dh-pra", "-o", auto)
        assert code == 0
        assert json.loads(out)["n"] == 8
        assert json.loads(err)["states"] == json.loads(out)["states"]
        code, out, _ = run(capsys, "simulate", auto, "ab", "ba", "")
        rows = [json.loads(line) for line in out.splitlines()]
        assert [r["word"] for r in rows] == ["ab", "ba", ""]
        assert rows[0]["p_acc"] > rows[1]["p_acc"]

    def test_prob_to_stdout(self, capsys, lang):
        code, out, _ = run(capsys, "construct", lang("ab", ["ab"]), "--model", "prob")
        assert code == 0 and json.loads(out)["model"] == "prob"

    def test_refuses_inconsistent(self, capsys, lang):
        code, out, _ = run(capsys, "construct", lang("abc", ["ab", "bac"]), "--model", "prob")
        assert code == 1 and "refused" in json.loads(out)

    def test_max_states(self, capsys, lang):
        code, out, _ = run(capsys, "construct", lang("abc", ["ab"]), "--model", "mm-qfa", "--n", "8",
                           "--max-states", "100")
        assert code == 2 and "error" in json.loads(out)

    def test_simulate_foreign_word(self, capsys, lang, tmp_path):
        auto = str(tmp_path / "a.json")
        run(capsys, "construct", lang("ab", ["ab"]), "--model", "prob", "-o", auto)
        code, out, _ = run(capsys, "simulate", auto, "abz")
        assert code == 2 and "error" in json.loads(out)


class TestVerify:
    def test_prob(self, capsys, lang):
        code, out, _ = run(capsys, "verify", lang("abc", ["ab"]), "--model", "prob", "--max-len", "5")
        d = json.loads(out)
        assert code == 0 and d["gap"] == "1/3" and d["tau_exhaustive"] is True

    def test_mmqfa(self, capsys, lang):
        code, out, _ = run(capsys, "verify", lang("abc", ["ab"]), "--model", "mm-qfa", "--n", "8", "--max-len", "3")
        d = json.loads(out)
        assert code == 0 and d["asymptotic_gap_bound_met"] is True

    def test_mmbqfa_table(self, capsys, lang):
        code, out, _ = run(capsys, "verify", lang("ab", ["ab"]), "--model", "mm-bqfa", "--table")
        d = json.loads(out)
        assert code == 0 and len(d["table"]) == d["corpus_size"]


class TestForbiddenCommand:
    def test_none_found_exits_zero(self, capsys, lang):
        code, out, _ = run(capsys, "forbidden", lang("ab", ["ab"]))
        assert code == 0 and json.loads(out) == {"found": False, "witness": None}

    def test_found(self, capsys, lang):
        code, out, _ = run(capsys, "forbidden", lang("abcd", ["abc", "bad"]))
        d = json.loads(out)
        assert code == 0 and d["witness"]["n"] == 2


class TestCpmap:
    @pytest.fixture
    def channel(self, tmp_path):
        def make(c, name):
            p = tmp_path / name
            p.write_text(json.dumps(c.to_dict()))
            return str(p)
        return make

    def test_check(self, capsys, channel):
        code, out, _ = run(capsys, "cpmap", "check", channel(CpMap([haar_unitary(2, 0)]), "u.json"))
        d = json.loads(out)
        assert code == 0 and d["predicates"]["bistochastic"] is True

    def test_omega_writes_file(self, capsys, channel, tmp_path):
        dest = str(tmp_path / "omega.json")
        code, out, _ = run(capsys, "cpmap", "omega", channel(random_measurement(2, 1), "m.json"), "-o", dest)
        assert code == 0
        E = np.array([[complex(*z) for z in row] for row in json.load(open(dest))["superoperator"]])
        assert np.abs(E @ E - E).max() < 1e-6

    def test_bist_ej(self, capsys, channel):
        files = [channel(random_measurement(3, s), f"m{s}.json") for s in range(3)]
        code, out, _ = run(capsys, "cpmap", "bistEJ", *files, "--limits", "--seed", "4")
        d = json.loads(out)
        assert code == 0 and d["ok"] and d["maps"] == 3

    def test_non_contractive_is_input_error(self, capsys, channel):
        code, out, _ = run(capsys, "cpmap", "omega", channel(CpMap([2 * np.eye(2)]), "big.json"))
        assert code == 2


class TestErrors:
    def test_missing_file(self, capsys):
        code, out, _ = run(capsys, "analyze", "/nonexistent.json")
        assert code == 2 and "error" in json.loads(out)

    def test_bad_language(self, capsys, lang):
        code, out, _ = run(capsys, "analyze", lang("ab", ["aba"]))
        assert code == 2

    def test_unknown_command(self, capsys):
        code, out, _ = run(capsys, "frobnicate")
        assert code == 2 and "error" in json.loads(out)
