import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from oracles import fourier_motzkin_consistent
from r1qfa.band import Alphabet, R1Language, enumerate_band
from r1qfa.errors import InputError, UnboundedError
from r1qfa.lp import LpProblem, boxify, decide_consistency, solve
from r1qfa.system import P1, P2, X, Y, Constraint, build_system, validate_assignment

FIVE = ["aedbc", "beca", "beda", "bedac", "eacb", "eacbd", "eadbc", "ebca"]


def _linprog_optimum(p: LpProblem) -> float:
    idx = {v: i for i, v in enumerate(p.variables)}
    n = len(idx)
    A, b, Ae, be = [], [], [], []
    for c in p.constraints:
        row = np.zeros(n)
        k = 0.0
        for v, coef in c.difference().items():
            row[idx[v]] += float(coef)
        if c.rel == "==":
            Ae.append(row), be.append(-k)
        elif c.rel == "<=":
            A.append(row), b.append(-k)
        else:
            A.append(-row), b.append(k)
    obj = np.zeros(n)
    for v, coef in p.objective.items():
        obj[idx[v]] -= float(coef)
    bounds = [tuple(None if x is None else float(x) for x in p.bounds.get(v, (None, None))) for v in p.variables]
    res = linprog(obj, A_ub=A or None, b_ub=b or None, A_eq=Ae or None, b_eq=be or None,
                  bounds=bounds, method="highs")
    assert res.status == 0
    return -res.fun


class TestSolver:
    def test_textbook(self):
        # max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
        p = LpProblem(("x", "y"), {"x": 3, "y": 2},
                      (Constraint({"x": 1, "y": 1}, "<=", {"c": 4}),
                       Constraint({"x": 1, "y": 3}, "<=", {"c": 6})),
                      {"x": (0, 3), "y": (0, None), "c": (1, 1)})
        with pytest.raises(InputError):
            solve(p)
        p = LpProblem(("x", "y", "c"), p.objective, p.constraints, p.bounds)
        out = solve(p)
        assert out.status == "optimal"
        assert out.optimum == 11
        assert out.assignment["x"] == 3 and out.assignment["y"] == 1

    def test_equality_and_free_variable(self):
        # max -z with z free, z == x - 2, x in [0, 1]
        p = LpProblem(("x", "z"), {"z": -1},
                      (Constraint({"z": 1}, "==", {"x": 1, "k": -2}),),
                      {"x": (0, 1), "k": (1, 1)})
        p = LpProblem(("x", "z", "k"), p.objective, p.constraints, p.bounds)
        out = solve(p)
        assert out.optimum == 2 and out.assignment["z"] == -2

    def test_infeasible(self):
        p = LpProblem(("x",), {"x": 1}, (Constraint({"x": 1}, ">=", {"k": 2}),), {"x": (0, 1), "k": (1, 1)})
        p = LpProblem(("x", "k"), p.objective, p.constraints, p.bounds)
        assert solve(p).status == "infeasible"

    def test_unbounded(self):
        p = LpProblem(("x",), {"x": 1}, (), {"x": (0, None)})
        with pytest.raises(UnboundedError):
            solve(p)

    def test_strict_rows_rejected(self):
        with pytest.raises(InputError):
            LpProblem(("x",), {"x": 1}, (Constraint({"x": 1}, "<", {}),))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_random_against_linprog(self, seed):
        rng = random.Random(seed)
        nv = rng.randint(1, 5)
        vs = tuple(f"v{i}" for i in range(nv)) + ("one",)
        cons = []
        for _ in range(rng.randint(0, 6)):
            lhs = {v: Fraction(rng.randint(-4, 4)) for v in vs[:-1]}
            cons.append(Constraint(lhs, rng.choice(["<=", ">="]), {"one": Fraction(rng.randint(-5, 5))}))
        bounds = {v: (Fraction(rng.randint(-3, 0)), Fraction(rng.randint(1, 4))) for v in vs[:-1]}
        bounds["one"] = (1, 1)
        obj = {v: Fraction(rng.randint(-3, 3)) for v in vs[:-1]}
        p = LpProblem(vs, obj, tuple(cons), bounds)
        out = solve(p)
        idx = {v: i for i, v in enumerate(vs)}
        A = [[float(c.difference().get(v, 0)) * (1 if c.rel == "<=" else -1) for v in vs] for c in cons]
        res = linprog([-float(obj.get(v, 0)) for v in vs], A_ub=A or None, b_ub=[0.0] * len(A) or None,
                      bounds=[tuple(float(x) for x in bounds[v]) for v in vs], method="highs")
        if res.status == 2:
            assert out.status == "infeasible"
        else:
            assert out.status == "optimal"
            assert float(out.optimum) == pytest.approx(-res.fun, abs=1e-9)
        assert idx  # keeps the layout readable in failures


class TestBoxedDecision:
    def test_ab_gap_is_the_cap(self):
        # caps are 1/|A|; over two letters the optimum is 1/2
        c = decide_consistency(R1Language.of("ab", ["ab"]))
        assert c.consistent and c.gap == Fraction(1, 2)

    @pytest.mark.parametrize("acc,sol", [
        (["ab"], {"x:{}|a": "1/2", "y:{a,b}": "1/2", "p1": "1/2", "p2": "1"}),
        (["bac"], {"x:{}|b": "1/2", "x:{a,b}|c": "1/2", "p1": "1/2", "p2": "1"}),
    ])
    def test_printed_assignments(self, acc, sol):
        s = build_system(R1Language.of("abc", acc))
        full = {k.name(s.language.alphabet): "0" for k in s.variables} | sol
        assert validate_assignment(s, full).ok

    def test_ab_analytic_witness(self):
        """Hand-derived vertex attaining 1/3 satisfies the raw system exactly."""
        L = R1Language.of("abc", ["ab"])
        s = build_system(L)
        sol = {k: Fraction(0) for k in s.variables}
        sol.update({X("", "a"): Fraction(1, 3), Y("ab"): Fraction(1, 3),
                    P1: Fraction(1, 3), P2: Fraction(2, 3)})
        assert validate_assignment(s, sol).ok

    def test_ab_over_three_letters(self):
        # the upper bound p2 - p1 <= L(ab) - L(abc) <= 1/3 comes from the caps
        c = decide_consistency(R1Language.of("abc", ["ab"]))
        assert c.consistent and c.gap == Fraction(1, 3)
        c = decide_consistency(R1Language.of("abc", ["bac"]))
        assert c.consistent and c.gap == Fraction(1, 3)

    def test_named_inconsistent(self):
        for letters, acc in (("abc", ["ab", "bac"]), ("abcd", ["abc", "bad"])):
            c = decide_consistency(R1Language.of(letters, acc))
            assert not c.consistent and c.gap == 0

    @pytest.mark.slow
    def test_five_letter_language(self):
        c = decide_consistency(R1Language.of("abcde", FIVE))
        assert not c.consistent

    def test_empty_alphabet_rejected(self):
        with pytest.raises(InputError):
            boxify(build_system(R1Language(Alphabet(()), frozenset())))

    @pytest.mark.parametrize("acc", [["ab"], ["a", "ba"], ["", "ab", "ba"], [], ["", "a", "b", "ab", "ba"]])
    def test_linprog_cross_check(self, acc):
        L = R1Language.of("ab", acc)
        c = decide_consistency(L)
        assert float(c.gap) == pytest.approx(_linprog_optimum(boxify(c.system)), abs=1e-9)

    def test_linprog_cross_check_three_letters(self):
        for acc in (["ab"], ["ab", "bac"], ["abc", "b", "ca"]):
            c = decide_consistency(R1Language.of("abc", acc))
            assert float(c.gap) == pytest.approx(_linprog_optimum(boxify(c.system)), abs=1e-9)

    def test_scaled_witness_still_solves_raw_system(self):
        """The raw system is homogeneous, so positive multiples stay solutions."""
        c = decide_consistency(R1Language.of("abc", ["ab", "c"]))
        assert c.consistent
        for k in (Fraction(1, 7), Fraction(5), Fraction(100, 3)):
            scaled = {v: k * x for v, x in c.witness.items()}
            assert validate_assignment(c.system, scaled).ok


def test_all_two_letter_languages_match_elimination():
    F = enumerate_band("ab")
    for r in range(len(F) + 1):
        for acc in itertools.combinations(F, r):
            L = R1Language.of("ab", list(acc))
            assert decide_consistency(L).consistent == fourier_motzkin_consistent(build_system(L))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(enumerate_band("abc")), unique=True))
def test_three_letter_languages_match_elimination(acc):
    L = R1Language.of("abc", acc)
    assert decide_consistency(L).consistent == fourier_motzkin_consistent(build_system(L))


@settings(max_examples=5, deadline=None)
@given(st.lists(st.sampled_from(enumerate_band("abcd")), unique=True, max_size=10))
def test_four_letter_languages_match_elimination(acc):
    L = R1Language.of("abcd", acc)
    assert decide_consistency(L).consistent == fourier_motzkin_consistent(build_system(L))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(enumerate_band("abc")), unique=True))
def test_complement_has_same_verdict(acc):
    """Swapping accept and reject mirrors any solution (negate, swap p1 and p2)."""
    L = R1Language.of("abc", acc)
    assert decide_consistency(L).consistent == decide_consistency(L.complement()).consistent
