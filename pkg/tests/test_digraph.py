from __future__ import annotations

import random
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dehnlab.digraph import (
    FoldedTable,
    LabeledGraph,
    complete,
    cycle_graph,
    dump_graph,
    fold,
    graph_of_word,
    isomorphic,
    parse_graph,
    trace,
    wedge_graph,
)
from dehnlab.freegroup import build_presentation, parse_word
from dehnlab.solvers import half_relators
from oracles import canonical_form, naive_fold, naive_trace, to_str, words


def canon(g: LabeledGraph, k: int = 3):
    return canonical_form(g.edges, g.base_out, g.base_in, k)


def oracle_fold(g: LabeledGraph, k: int = 3):
    edges, bo, bi = naive_fold(g.num_vertices, g.edges, g.base_out, g.base_in)
    return canonical_form(edges, bo, bi, k)


# -- construction --------------------------------------------------------------

def test_graph_of_empty_word():
    g = graph_of_word(())
    assert g.num_vertices == 1 and g.edges == () and g.base_out == g.base_in == 0


def test_graph_of_word_ab():
    g = graph_of_word(parse_word("ab"))
    assert g.num_vertices == 3
    assert g.edges == ((0, 1, 0), (1, 2, 1))
    assert (g.base_out, g.base_in) == (0, 2)


def test_graph_of_aA_folds_to_two_vertices():
    g = graph_of_word(parse_word("aA"))
    assert g.num_vertices == 3
    f = fold(g)
    assert f.num_vertices == 2 and len(f.edges) == 1
    assert f.base_out == f.base_in


def test_wedge_examples():
    assert wedge_graph((), []).num_vertices == 1
    g = wedge_graph(parse_word("a"), [parse_word("bb")])
    assert (g.num_vertices, len(g.edges)) == (3, 3)
    h = wedge_graph((), [parse_word("a")])
    assert h.num_vertices == 1 and h.edges == ((0, 0, 0),)


@given(words(2, 6), st.lists(words(2, 5), max_size=3))
def test_wedge_vertex_count(w, hs):
    g = wedge_graph(w, hs)
    assert g.num_vertices == len(w) + 1 + sum(max(len(h) - 1, 0) for h in hs)


def test_cycle_graph():
    g = cycle_graph(parse_word("abc"))
    assert g.num_vertices == 3 and g.base_out == g.base_in == 0
    assert trace(g, 0, parse_word("abc")) == 0


# -- folding ---------------------------------------------------------------------

def test_fold_merges_sibling_leaves():
    g = LabeledGraph(3, ((0, 1, 0), (0, 2, 0)), 0, None)
    f = fold(g)
    assert f.num_vertices == 2 and f.is_folded()


def test_fold_of_folded_graph_is_identity():
    g = graph_of_word(parse_word("abAc"))
    assert g.is_folded()
    assert fold(g) == g


@settings(max_examples=150)
@given(words(3, 14))
def test_fold_matches_naive_oracle(w):
    g = graph_of_word(w)
    assert canon(fold(g)) == oracle_fold(g)


@settings(max_examples=80)
@given(words(2, 8), st.lists(words(2, 6), max_size=3))
def test_fold_of_wedge_matches_oracle(w, hs):
    g = wedge_graph(w, hs)
    assert canon(fold(g), 2) == oracle_fold(g, 2)


@settings(max_examples=80)
@given(words(2, 10), st.lists(words(2, 6), max_size=3), st.randoms(use_true_random=False))
def test_fold_confluence_under_relabelling(w, hs, rnd):
    g = wedge_graph(w, hs)
    perm = list(range(g.num_vertices))
    rnd.shuffle(perm)
    edges = [(perm[s], perm[t], x) for s, t, x in g.edges]
    rnd.shuffle(edges)
    bi = None if g.base_in is None else perm[g.base_in]
    h = LabeledGraph(g.num_vertices, tuple(edges), perm[g.base_out], bi)
    assert fold(h) == fold(g)
    assert isomorphic(g, h)


@settings(max_examples=80)
@given(words(2, 12))
def test_fold_idempotent_and_folded(w):
    f = fold(graph_of_word(w))
    assert f.is_folded()
    assert fold(f) == f


@settings(max_examples=80)
@given(words(2, 6), words(2, 6))
def test_fold_preserves_loops(u, v):
    # the wedge reads u as a loop at the base; folding must keep it one
    g = wedge_graph(v, [u])
    f = fold(g)
    assert trace(f, f.base_out, u) == f.base_out
    assert trace(f, f.base_out, v) == f.base_in


# -- completion ------------------------------------------------------------------

def test_complete_single_vertex_cube():
    p = build_presentation(1, ["aaa"])
    g = complete(graph_of_word(()), p)
    assert g.num_vertices == 1 + 2 * 2


def test_complete_without_relators_is_identity():
    p = build_presentation(2, [])
    g = graph_of_word(parse_word("abA"))
    assert complete(g, p) == g


@settings(max_examples=60)
@given(words(2, 8))
def test_complete_is_monotone_and_size_bounded(w):
    p = build_presentation(2, ["abAB"])
    g = wedge_graph(w, [])
    c = complete(g, p)
    assert c.num_vertices <= g.num_vertices * p.L
    assert set(g.edges) <= set(c.edges)
    assert c.base_out == g.base_out and c.base_in == g.base_in


@pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
def test_fused_completion_matches_literal_completion(k):
    p = build_presentation(2, ["abAB"])
    w = parse_word("a" * k + "b" * k + "A" * k + "B" * k)
    literal = fold(graph_of_word(w))
    table = FoldedTable.from_graph(graph_of_word(w), 2)
    table.compact()
    rels = half_relators(p)
    for _ in range(k + 2):
        literal = fold(complete(literal, p))
        table.complete_and_fold(rels)
        table.compact()
        assert table.snapshot() == literal
        if literal.base_out == literal.base_in:
            break
    assert literal.base_out == literal.base_in


@settings(max_examples=25, deadline=None)
@given(words(1, 10))
def test_fused_completion_matches_literal_on_finite_group(w):
    p = build_presentation(1, ["aaa"])
    literal = fold(graph_of_word(w))
    table = FoldedTable.from_graph(graph_of_word(w), 1)
    table.compact()
    for _ in range(2):
        literal = fold(complete(literal, p))
        table.complete_and_fold(half_relators(p))
        table.compact()
        assert table.snapshot() == literal


@settings(max_examples=60, deadline=None)
@given(words(2, 6), st.lists(words(2, 3), min_size=1, max_size=2))
def test_fused_completion_matches_literal_on_wedges(w, hs):
    # subgroup loops create vertices where a gap's first and last edges meet
    p = build_presentation(2, ["abAB"])
    g = wedge_graph(w, hs)
    literal = fold(g)
    table = FoldedTable.from_graph(g, 2)
    table.compact()
    for _ in range(2):
        literal = fold(complete(literal, p))
        table.complete_and_fold(half_relators(p))
        table.compact()
        assert table.snapshot() == literal


def test_gap_closing_on_its_own_start():
    # at a vertex with a b-loop, filling AbaB closes the gap onto its opening edge
    t = FoldedTable.from_graph(wedge_graph(parse_word("babA"), [parse_word("b")]), 2)
    t.compact()
    t.complete_and_fold(half_relators(build_presentation(2, ["abAB"])))
    assert t.snapshot().is_folded()


@settings(max_examples=60, deadline=None)
@given(words(2, 5), st.lists(words(2, 4), min_size=1, max_size=2))
def test_voltage_completion_stays_folded(u, rels):
    from dehnlab.digraph import VoltageTable
    from dehnlab.freegroup import cyclically_reduce
    u = cyclically_reduce(u)
    rels = [cyclically_reduce(r) for r in rels if cyclically_reduce(r)]
    if not u:
        return
    t = VoltageTable.cycle(u, 2)
    for _ in range(2):
        t.complete_and_fold(rels)
        t.compact()
        assert t.snapshot().is_folded()


# -- trace -----------------------------------------------------------------------

def test_trace_examples():
    g = fold(graph_of_word(parse_word("ab")))
    assert trace(g, g.base_out, parse_word("ab")) == g.base_in
    assert trace(g, g.base_out, ()) == g.base_out
    assert trace(g, g.base_out, parse_word("b")) is None


def test_trace_rejects_unfolded():
    g = LabeledGraph(3, ((0, 1, 0), (0, 2, 0)), 0, None)
    with pytest.raises(ValueError):
        trace(g, 0, parse_word("a"))


@settings(max_examples=80)
@given(words(2, 10), words(2, 6))
def test_trace_matches_naive_walk(w, probe):
    g = fold(graph_of_word(w))
    assert trace(g, g.base_out, probe) == naive_trace(g.edges, g.base_out, to_str(probe))


# -- debug format and scale ---------------------------------------------------------

@given(words(2, 10), st.lists(words(2, 4), max_size=2))
def test_dump_parse_round_trip(w, hs):
    g = wedge_graph(w, hs)
    assert parse_graph(dump_graph(g)) == g


def test_fold_scales_near_linearly():
    rng = random.Random(5)
    w = tuple(rng.choice([1, -1, 2, -2]) for _ in range(40000))
    g = wedge_graph(w, [w[:5000]])
    t = time.perf_counter()
    f = fold(g)
    assert f.is_folded()
    assert time.perf_counter() - t < 10.0
