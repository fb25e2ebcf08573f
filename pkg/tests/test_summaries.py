import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from funcgraph.errors import DimensionMismatchError, EmptyTraceError, MissingMetadataError
from funcgraph.graph import DecomposableGraph, enumerate_decomposable
from funcgraph.likelihood import GraphPrior
from funcgraph.pipeline import FitConfig, fit_functional
from funcgraph.sampler import ChainTrace, McmcConfig, run_algorithm1
from funcgraph.simulate import gen_smooth_dataset, sim_preset
from funcgraph.summaries import (
    NodeMetadata,
    accuracy_stats,
    compare_groups,
    graph_frequencies,
    inclusion_probs,
    posterior_mode,
    region_asymmetry_stats,
    threshold_graph,
)

from helpers import exact_posterior, small_problem


def trace_of(graphs):
    t = ChainTrace(graphs[0].p)
    for k, g in enumerate(graphs):
        t.sweeps.append(k)
        t.graphs.append(g)
        t.log_posts.append(0.0)
        t.accepts.append(False)
    return t


PATH = DecomposableGraph.from_edges(3, [(0, 1), (1, 2)])


def test_constant_trace_probabilities_are_binary():
    probs = inclusion_probs(trace_of([PATH] * 5))
    assert set(np.unique(probs)) <= {0.0, 1.0}
    assert probs[0, 1] == 1.0 and probs[0, 2] == 0.0
    assert np.array_equal(probs, probs.T) and not probs.diagonal().any()


def test_one_edge_difference_gives_half():
    other = DecomposableGraph.from_edges(3, [(0, 1)])
    probs = inclusion_probs(trace_of([PATH, other]))
    assert probs[1, 2] == 0.5 and probs[0, 1] == 1.0


def test_empty_trace():
    with pytest.raises(EmptyTraceError):
        inclusion_probs(ChainTrace(3))
    with pytest.raises(EmptyTraceError):
        graph_frequencies([ChainTrace(3)])


def test_inclusion_matches_enumeration():
    data, params = small_problem(seed=5)
    exact = exact_posterior(data, params, GraphPrior.default(3))
    expect = sum(w * g.adjacency_matrix() for g, w in exact.items())
    tr = run_algorithm1(data, params, McmcConfig(iterations=30000, burn_in=1000, seed=2, global_prob=0.2))
    assert np.max(np.abs(inclusion_probs(tr) - expect)) < 0.03


def test_accuracy_extremes():
    stats = accuracy_stats(trace_of([PATH] * 4), PATH)
    assert (stats.mis_rate, stats.sensitivity, stats.specificity, stats.mean_edges) == (0.0, 1.0, 1.0, 2.0)
    complement = DecomposableGraph.from_edges(3, [(0, 2)])
    stats = accuracy_stats(trace_of([complement] * 4), PATH)
    assert (stats.mis_rate, stats.sensitivity, stats.specificity) == (1.0, 0.0, 0.0)
    assert list(stats.as_row()) == ["MisR", "Sen", "Spec", "nEdge"]
    with pytest.raises(DimensionMismatchError):
        accuracy_stats(trace_of([PATH]), DecomposableGraph.empty(4))


@given(st.integers(0, 2**32 - 1), st.integers(3, 5))
def test_misr_decomposes_into_sen_and_spec(seed, p):
    rng = np.random.default_rng(seed)
    graphs = enumerate_decomposable(p)
    truth = graphs[rng.integers(len(graphs))]
    trace = trace_of([graphs[k] for k in rng.integers(len(graphs), size=20)])
    s = accuracy_stats(trace, truth)
    pairs = p * (p - 1) / 2
    w_e = truth.n_edges / pairs
    w_n = 1 - w_e
    rebuilt = (w_e * (1 - s.sensitivity) if truth.n_edges else 0.0) + (w_n * (1 - s.specificity) if w_n else 0.0)
    assert s.mis_rate == pytest.approx(rebuilt, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_inclusion_is_column_mean_of_indicators(seed):
    rng = np.random.default_rng(seed)
    graphs = enumerate_decomposable(4)
    trace = trace_of([graphs[k] for k in rng.integers(len(graphs), size=15)])
    assert np.allclose(inclusion_probs(trace), trace.edge_indicators().mean(axis=0))


def test_threshold_extremes():
    other = DecomposableGraph.from_edges(3, [(0, 1)])
    probs = inclusion_probs(trace_of([PATH, other, other]))
    assert threshold_graph(probs, 1.0) == []
    assert threshold_graph(probs, 0.0) == [(0, 1), (1, 2)]
    assert threshold_graph(probs, 0.5) == [(0, 1)]
    with pytest.raises(ValueError):
        threshold_graph(probs, 1.5)


def test_posterior_mode_and_ties():
    other = DecomposableGraph.from_edges(3, [(0, 1)])
    assert posterior_mode(trace_of([PATH, other, other])) == other
    # tie: smaller sorted edge list wins
    assert posterior_mode(trace_of([PATH, other])) == other


def test_metadata_validation():
    with pytest.raises(ValueError):
        NodeMetadata(("a", "b", "c"), (1, 2, 0))
    with pytest.raises(DimensionMismatchError):
        NodeMetadata(("a",), (-1, -1))


# left/right pairs: (0,1) frontal, (2,3) central, (4,5) occipital
META = NodeMetadata(("F", "F", "C", "C", "O", "O"), (1, 0, 3, 2, 5, 4))


def test_symmetric_graph_has_no_asymmetric_edges():
    g = DecomposableGraph.from_edges(6, [(0, 2), (1, 3), (2, 4), (3, 5)])
    stats = region_asymmetry_stats(trace_of([g]), META)
    assert stats.total_asymmetric[0] == 0
    assert stats.total_edges[0] == 4
    assert stats.region_edges["C"][0] == 4 and stats.region_edges["F"][0] == 2


def test_single_unmirrored_edge_counts_once():
    g = DecomposableGraph.from_edges(6, [(0, 2)])
    stats = region_asymmetry_stats(trace_of([g]), META)
    assert stats.total_asymmetric[0] == 1
    assert stats.region_asymmetric["F"][0] == 1 and stats.region_asymmetric["C"][0] == 1
    assert stats.region_asymmetric["O"][0] == 0


def test_undefined_mirror_is_never_asymmetric():
    meta = NodeMetadata(("F", "F", "C"), (1, 0, -1))
    g = DecomposableGraph.from_edges(3, [(0, 2)])
    assert region_asymmetry_stats(trace_of([g]), meta).total_asymmetric[0] == 0


def test_metadata_must_cover_trace():
    with pytest.raises(MissingMetadataError):
        region_asymmetry_stats(trace_of([PATH]), META)


def test_compare_groups():
    cmp = compare_groups(np.array([1, 2, 3, 4]), np.array([2, 2, 2]))
    assert (cmp.greater, cmp.equal, cmp.less) == pytest.approx((1 / 3, 1 / 3, 1 / 3))
    with pytest.raises(EmptyTraceError):
        compare_groups(np.array([]), np.array([1]))


def test_two_group_frontal_comparison():
    # group B has a frontal triangle that group A lacks
    meta = NodeMetadata(("F", "F", "F", "P", "P", "P"), (-1,) * 6)
    graphs = {"A": ((3, 4), (3, 5), (4, 5)), "B": ((0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5))}
    frontal = {}
    for k, (name, edges) in enumerate(graphs.items()):
        data, _ = gen_smooth_dataset(sim_preset("sim1", graph=edges, seed=20 + k))
        result = fit_functional(data, FitConfig(seed=k, iters=3000))
        frontal[name] = region_asymmetry_stats(result.traces, meta).region_edges["F"]
    assert compare_groups(frontal["A"], frontal["B"]).less > 0.95
