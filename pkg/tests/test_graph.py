from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from funcgraph.errors import BadIndexError, IllegalMoveError, NonChordalError, TooLargeError
from funcgraph.graph import (
    ADD,
    CROSS,
    DELETE,
    WITHIN,
    DecomposableGraph,
    EdgeMove,
    MoveSet,
    connected_components,
    enumerate_decomposable,
    is_decomposable,
    junction_sequence,
    legal_moves,
    mcs_order,
)

from oracles import is_chordal, maximal_cliques, random_chordal_edges


@st.composite
def chordal_graphs(draw, max_p=9):
    p = draw(st.integers(1, max_p))
    seed = draw(st.integers(0, 2**32 - 1))
    edges = random_chordal_edges(p, np.random.default_rng(seed), steps=4 * p * p) if p > 1 else []
    return DecomposableGraph.from_edges(p, edges)


def sets(xs):
    return [set(x) for x in xs]


# examples


def test_empty_graph_has_singleton_cliques():
    j = junction_sequence(DecomposableGraph.empty(3))
    assert sets(j.cliques) == [{0}, {1}, {2}]
    assert sets(j.separators) == [set(), set()]


def test_complete_graph_is_one_clique():
    j = junction_sequence(DecomposableGraph.complete(3))
    assert sets(j.cliques) == [{0, 1, 2}]
    assert j.separators == []
    assert sets(junction_sequence(DecomposableGraph.complete(4)).cliques) == [{0, 1, 2, 3}]


def test_path_decomposition():
    j = junction_sequence(DecomposableGraph.from_edges(3, [(0, 1), (1, 2)]))
    assert sets(j.cliques) == [{0, 1}, {1, 2}]
    assert sets(j.separators) == [{1}]


def test_two_triangles_sharing_an_edge():
    edges = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]
    j = junction_sequence(DecomposableGraph.from_edges(4, edges))
    assert set(j.cliques) == maximal_cliques(4, edges)
    assert sets(j.separators) == [{1, 2}]


def test_four_cycle_is_rejected():
    cycle = [(0, 1), (1, 2), (2, 3), (0, 3)]
    assert not is_decomposable(4, cycle)
    with pytest.raises(NonChordalError):
        DecomposableGraph.from_edges(4, cycle)


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 5)], [(-1, 2)]])
def test_bad_pairs(edges):
    with pytest.raises(BadIndexError):
        is_decomposable(3, edges)


def test_mcs_breaks_ties_by_lowest_index():
    assert mcs_order(4, DecomposableGraph.empty(4).adj) == [0, 1, 2, 3]


def test_enumeration_counts_match_known_sequence():
    # labeled chordal graphs: 1, 2, 8, 61, 822
    assert [len(enumerate_decomposable(p)) for p in range(1, 6)] == [1, 2, 8, 61, 822]


def test_enumeration_limit():
    with pytest.raises(TooLargeError):
        enumerate_decomposable(7)


def test_move_tags_and_counts():
    g = DecomposableGraph.from_edges(4, [(0, 1), (1, 2)])
    ms = MoveSet(g.p, g.adj)
    moves = legal_moves(g)
    cross = [m.pair for m in moves if m.case_tag == CROSS]
    within = [m.pair for m in moves if m.case_tag == WITHIN]
    deletes = [m.pair for m in moves if m.kind == DELETE]
    assert cross == [(0, 3), (1, 3), (2, 3)]
    assert within == [(0, 2)]
    assert deletes == [(0, 1), (1, 2)]
    assert ms.n_add == 4 and ms.n_delete == 2


def test_apply_illegal_move():
    g = DecomposableGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    with pytest.raises(IllegalMoveError):
        g.apply(EdgeMove((0, 3), ADD))
    with pytest.raises(IllegalMoveError):
        g.apply(EdgeMove((0, 2), DELETE))


def test_move_sampling_is_uniform(rng):
    g = DecomposableGraph.from_edges(5, [(0, 1), (1, 2)])
    ms = MoveSet(g.p, g.adj)
    draws = [ms.sample_add(rng) for _ in range(20000)]
    counts = {}
    for d in draws:
        counts[d] = counts.get(d, 0) + 1
    legal = {m.pair for m in ms.moves() if m.kind == ADD}
    assert set(counts) == legal
    expected = len(draws) / len(legal)
    assert max(abs(c - expected) for c in counts.values()) < 5 * np.sqrt(expected)


def test_components():
    g = DecomposableGraph.from_edges(5, [(0, 3), (1, 4)])
    assert connected_components(g) == [[0, 3], [1, 4], [2]]


# properties


@given(chordal_graphs())
def test_junction_invariants(g):
    j = junction_sequence(g)
    assert set(j.cliques) == maximal_cliques(g.p, g.edges)
    assert len(j.separators) == len(j.cliques) - 1
    covered = set()
    for c in j.cliques:
        covered |= set(combinations(sorted(c), 2))
    assert set(g.edges) <= covered
    # running intersection: each separator is H_{i-1} n C_i and lies in an earlier clique
    history = set(j.cliques[0])
    for k, (c, s) in enumerate(zip(j.cliques[1:], j.separators), start=1):
        assert s == history & c
        assert any(s <= prev for prev in j.cliques[:k])
        history |= c
    assert sum(map(len, j.cliques)) - sum(map(len, j.separators)) == g.p


@given(chordal_graphs())
def test_junction_is_deterministic(g):
    again = DecomposableGraph(g.p, tuple(g.adj))
    assert junction_sequence(again) == junction_sequence(g)


@given(chordal_graphs(max_p=8))
def test_legal_moves_match_chordality_oracle(g):
    legal = {m.pair: m.kind for m in legal_moves(g)}
    for i, j in combinations(range(g.p), 2):
        toggled = set(g.edges) ^ {(i, j)}
        assert ((i, j) in legal) == is_chordal(g.p, toggled)
        if (i, j) in legal:
            after = g.apply(EdgeMove((i, j), legal[(i, j)]))
            assert is_decomposable(after.p, after.edges)


@given(st.integers(1, 7), st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_is_decomposable_matches_oracle(p, seed, density):
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i, j in combinations(range(p), 2) if rng.random() < density]
    assert is_decomposable(p, edges) == is_chordal(p, edges)


@given(chordal_graphs())
def test_graph_value_semantics(g):
    assert g == DecomposableGraph.from_edges(g.p, g.edges)
    assert hash(g) == hash(DecomposableGraph.from_edges(g.p, g.edges))
    a = g.adjacency_matrix()
    assert (a == a.T).all() and not a.diagonal().any()
    assert a.sum() == 2 * g.n_edges
