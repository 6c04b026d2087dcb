import itertools

import pytest
from hypothesis import given, settings, strategies as st

from oracles import constraint_sums_equal, naive_forbidden
from r1qfa.band import R1Language, enumerate_band
from r1qfa.errors import InputError, SizeLimitError
from r1qfa.forbidden import ForbiddenWitness, check_witness, find_forbidden
from r1qfa.lp import decide_consistency
from r1qfa.system import expression_for

FIVE = R1Language.of("abcde", ["aedbc", "beca", "beda", "bedac", "eacb", "eacbd", "eadbc", "ebca"])
ABCD = R1Language.of("abcd", ["abc", "bad"])


def test_abc_bad_witness():
    w = find_forbidden(ABCD)
    assert w is not None and w.n == 2 and w.m == 2
    assert set(w.words[:2]) == {"abc", "bad"} and set(w.words[2:]) == {"abd", "bac"}
    cols = w.columns()
    assert sorted(cols[0][0]) == sorted(cols[0][1]) == ["ab", "ba"]
    assert sorted(cols[1][0]) == sorted(cols[1][1]) == ["c", "d"]
    assert check_witness(ABCD, w)
    assert constraint_sums_equal(w, expression_for)
    assert not decide_consistency(ABCD).consistent


def test_ab_bac_needs_empty_final_factor():
    L = R1Language.of("abc", ["ab", "bac"])
    assert find_forbidden(L) is None
    w = find_forbidden(L, allow_empty_final=True)
    assert w is not None and w.n == 2 and w.m == 2
    assert check_witness(L, w, allow_empty_final=True)
    assert not check_witness(L, w)
    assert constraint_sums_equal(w, expression_for)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.sampled_from(enumerate_band("abc")), unique=True))
def test_search_matches_brute_force_with_empty_final(acc):
    L = R1Language.of("abc", acc)
    w = find_forbidden(L, max_m=2, allow_empty_final=True)
    assert (w is not None) == naive_forbidden(L, max_m=2, allow_empty_final=True)


def test_swapped_factors_break_witness():
    w = find_forbidden(ABCD)
    f = list(w.factors)
    f[0] = (f[0][1], f[0][0])
    assert not check_witness(ABCD, ForbiddenWitness(w.n, w.m, w.words, tuple(f)))


def test_tampered_witnesses():
    w = find_forbidden(ABCD)
    assert not check_witness(ABCD, ForbiddenWitness(w.n, w.m, w.words[::-1], w.factors[::-1]))
    assert not check_witness(ABCD, ForbiddenWitness(w.n, 1, w.words[:2], w.factors[:2]))
    assert not check_witness(ABCD, ForbiddenWitness(1, w.m, w.words, tuple((x,) for x in w.words)))


def test_dict_round_trip():
    w = find_forbidden(ABCD)
    assert ForbiddenWitness.from_dict(w.to_dict()) == w


def test_single_letter_none():
    assert find_forbidden(R1Language.of("a", ["a"])) is None


@pytest.mark.slow
def test_five_letter_language_has_none():
    assert find_forbidden(FIVE) is None


def test_limits():
    with pytest.raises(SizeLimitError):
        find_forbidden(R1Language.of("abcdefg", []))
    with pytest.raises(InputError):
        find_forbidden(ABCD, max_m=0)


def test_two_letters_never_forbidden():
    F = enumerate_band("ab")
    for r in range(len(F) + 1):
        for acc in itertools.combinations(F, r):
            L = R1Language.of("ab", list(acc))
            assert find_forbidden(L) is None
            assert not naive_forbidden(L, max_m=2)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.sampled_from(enumerate_band("abc")), unique=True))
def test_search_matches_brute_force(acc):
    L = R1Language.of("abc", acc)
    w = find_forbidden(L, max_m=2)
    assert (w is not None) == naive_forbidden(L, max_m=2)
    if w is not None:
        assert check_witness(L, w)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(enumerate_band("abc")), unique=True))
def test_witness_implies_inconsistent_three_letters(acc):
    # three letters only admit witnesses whose last factor may be empty
    L = R1Language.of("abc", acc)
    w = find_forbidden(L, allow_empty_final=True)
    if w is not None:
        assert check_witness(L, w, allow_empty_final=True)
        assert constraint_sums_equal(w, expression_for)
        assert not decide_consistency(L).consistent


@settings(max_examples=8, deadline=None)
@given(st.lists(st.sampled_from(enumerate_band("abcd")), unique=True, max_size=12))
def test_witness_implies_inconsistent_four_letters(acc):
    L = R1Language.of("abcd", acc)
    w = find_forbidden(L, max_m=2)
    if w is not None:
        assert check_witness(L, w)
        assert not decide_consistency(L).consistent


def test_empty_final_factor_flag():
    """Allowing an empty last factor can only add witnesses."""
    for acc in (["ab"], ["ab", "ba"], ["a", "bc"], ["abc", "b"]):
        L = R1Language.of("abc", acc)
        if find_forbidden(L) is not None:
            assert find_forbidden(L, allow_empty_final=True) is not None
        w = find_forbidden(L, allow_empty_final=True)
        if w is not None:
            assert check_witness(L, w, allow_empty_final=True)
            assert naive_forbidden(L, max_m=4, allow_empty_final=True) or w.m > 4
