from __future__ import annotations

import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dehnlab.freegroup import (
    PresentationError,
    build_presentation,
    canonical_relator,
    cyclically_reduce,
    exponent_vector,
    format_word,
    invert,
    is_cyclically_reduced,
    is_reduced,
    parse_presentation,
    parse_presentation_text,
    parse_word,
    reduce,
    serialize_presentation,
    symmetrize,
)
from oracles import (
    enumerate_symmetrization,
    exponent_sums,
    naive_cyclic_reduce,
    naive_reduce,
    to_str,
    word_strings,
    words,
)


def W(s):
    return parse_word(s)


def S(w):
    return format_word(w)


# -- reduce -------------------------------------------------------------------

@pytest.mark.parametrize("text, expected", [("aA", "1"), ("abBA", "1"), ("abBc", "ac")])
def test_reduce_examples(text, expected):
    assert S(reduce(W(text))) == expected


@pytest.mark.parametrize("text, expected", [("Aba", "b"), ("ab", "ab")])
def test_cyclically_reduce_examples(text, expected):
    assert S(cyclically_reduce(W(text))) == expected


def test_cyclically_reduce_nested_matches_strip_oracle():
    assert S(cyclically_reduce(W("BabAb"))) == naive_cyclic_reduce("BabAb") == "b"


def test_invert_examples():
    assert S(invert(W("ab"))) == "BA"
    assert invert(()) == ()
    assert S(invert(invert(W("aBa")))) == "aBa"


@given(word_strings(3, 20))
def test_reduce_matches_naive_rewriting(s):
    assert to_str(reduce(W(s))) == naive_reduce(s)


@given(word_strings(3, 20))
def test_cyclic_reduce_matches_oracle(s):
    assert to_str(cyclically_reduce(W(s))) == naive_cyclic_reduce(s)


@given(words(3, 20))
def test_reduce_idempotent_and_shorter(w):
    r = reduce(w)
    assert reduce(r) == r
    assert len(r) <= len(w)
    assert is_reduced(r)


@given(words(3, 20))
def test_word_times_inverse_is_trivial(w):
    assert reduce(w + invert(w)) == ()


@given(words(3, 20))
def test_cyclic_reduction_endpoints(w):
    c = cyclically_reduce(w)
    assert is_cyclically_reduced(c)
    if len(c) >= 2:
        assert c[0] != -c[-1]


@given(words(3, 20))
def test_exponent_vector_invariant(w):
    v = exponent_vector(w, 3)
    assert list(v) == exponent_sums(to_str(w), 3)
    assert exponent_vector(reduce(w), 3) == v
    assert exponent_vector(invert(w), 3) == tuple(-x for x in v)


# -- symmetrize ---------------------------------------------------------------

def test_symmetrize_empty():
    assert symmetrize([]) == frozenset()


def test_symmetrize_power():
    assert {S(w) for w in symmetrize([W("aaa")])} == {"aaa", "AAA"} == enumerate_symmetrization(["aaa"])


def test_symmetrize_commutator():
    got = {S(w) for w in symmetrize([W("abAB")])}
    assert got == {"abAB", "bABa", "ABab", "BabA", "baBA", "aBAb", "BAba", "AbaB"}
    assert got == enumerate_symmetrization(["abAB"])


@settings(max_examples=60)
@given(st.lists(word_strings(2, 7), max_size=3))
def test_symmetrize_matches_enumeration_and_is_closed(rels):
    sym = symmetrize([W(r) for r in rels])
    assert {S(w) for w in sym} == enumerate_symmetrization(rels)
    assert symmetrize(sym) == sym
    for r in sym:
        assert invert(r) in sym
        assert r[1:] + r[:1] in sym
        assert is_cyclically_reduced(r)


@given(words(2, 8))
def test_canonical_relator_is_class_invariant(w):
    c = cyclically_reduce(w)
    if not c:
        return
    rot = c[2 % len(c):] + c[:2 % len(c)]
    assert canonical_relator(c) == canonical_relator(invert(rot))


# -- presentations ------------------------------------------------------------

def test_presentation_cyclic_group():
    p = build_presentation(1, ["aaa"])
    assert {S(w) for w in p.identities} == {"aA", "Aa", "aaa", "AAA"}
    assert p.L == 6


def test_presentation_free_group():
    p = build_presentation(2, [])
    assert {S(w) for w in p.identities} == {"aA", "Aa", "bB", "Bb"}
    assert p.L == 0


def test_presentation_commutator_total_length():
    p = build_presentation(2, ["abAB"])
    assert p.L == sum(len(r) for r in enumerate_symmetrization(["abAB"])) == 32


def test_presentation_duplicate_relators_merge():
    p = build_presentation(2, ["abAB", "BAba", "baBA"])
    assert len(p.defining) == 1 and p.L == 32


def test_presentation_rejects_unknown_letter_with_index():
    with pytest.raises(PresentationError) as err:
        build_presentation(2, ["ab", "abc"])
    assert err.value.index == 1


def test_presentation_drops_empty_relators_with_warning():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        p = build_presentation(1, ["aA", "aaa"])
    assert p.L == 6
    assert any("dropped" in str(w.message) for w in caught)


def test_too_many_generators():
    with pytest.raises(PresentationError):
        build_presentation(27, [])


def test_quotient_presentation():
    p = build_presentation(2, ["abAB"]).with_relators(["aa", "bb"])
    assert {S(r) for r in p.defining} == {"aa", "bb", "abAB"}


TEXT = """\
# commutator with a subgroup
gens a b
rel abAB

sub ab
"""


def test_text_format_round_trip():
    pf = parse_presentation_text(TEXT)
    assert pf.subgroup == (W("ab"),)
    text = serialize_presentation(pf)
    again = parse_presentation_text(text)
    assert again == pf
    assert serialize_presentation(again) == text


def test_text_format_custom_alphabet():
    p = parse_presentation("gens x y\nrel xyXY\n")
    assert p.alphabet == "xy"
    assert p.parse("xY") == (1, -2)
    assert p.format((2, -1)) == "yX"


@pytest.mark.parametrize("bad", ["rel ab\n", "gens a a\n", "gens a\nrel ab\n", "gens a\nfoo a\n",
                                 "gens ab\n"])
def test_text_format_errors(bad):
    with pytest.raises(PresentationError):
        parse_presentation(bad)


@settings(max_examples=40)
@given(st.lists(word_strings(3, 6), max_size=4))
def test_serialize_round_trip_property(rels):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = build_presentation(3, rels)
    text = serialize_presentation(p)
    assert parse_presentation(text) == p
