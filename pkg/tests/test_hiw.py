import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import multigammaln
from scipy.stats import invwishart

from funcgraph.errors import DimensionMismatchError, DomainError, NotSPDError
from funcgraph.graph import DecomposableGraph, JunctionSequence, mask_of
from funcgraph.hiw import (
    BlockLayout,
    HiwParams,
    hiw_posterior_update,
    iw_log_normalizer,
    log_h,
    log_multigamma,
    markov_completion,
    sample_hiw_completed,
    sample_iw_dawid,
)

from oracles import random_chordal_edges


def random_spd(d, rng, ridge=0.5):
    a = rng.standard_normal((d, d + 2))
    return a @ a.T / (d + 2) + ridge * np.eye(d)


@given(st.integers(0, 6), st.floats(3.0, 40.0))
def test_log_multigamma_matches_scipy(b, a):
    expect = 0.0 if b == 0 else multigammaln(a, b)
    assert log_multigamma(b, a) == pytest.approx(expect, rel=1e-12, abs=1e-12)


def test_log_multigamma_domain():
    with pytest.raises(DomainError):
        log_multigamma(3, 0.5)


def test_iw_normalizer_integrates_density(rng):
    # d = 1: the Dawid IW density is h * s^{-(delta+2)/2} exp(-u / (2 s))
    from scipy.integrate import quad

    delta, u = 4.0, np.array([[2.5]])
    log_norm = iw_log_normalizer(delta, u)
    f = lambda s: np.exp(log_norm - (delta + 2) / 2 * np.log(s) - u[0, 0] / (2 * s))
    total, _ = quad(f, 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_iw_normalizer_matches_scipy_density(rng):
    # inv(Q) ~ Wishart(delta + d - 1, inv(U))  <=>  Q ~ scipy invwishart(df=delta + d - 1, scale=U)
    d, delta = 3, 6.0
    u = random_spd(d, rng)
    q = random_spd(d, rng)
    df = delta + d - 1
    ours = iw_log_normalizer(delta, u) - (delta + 2 * d) / 2 * np.linalg.slogdet(q)[1]
    ours -= 0.5 * np.trace(u @ np.linalg.inv(q))
    assert ours == pytest.approx(invwishart(df=df, scale=u).logpdf(q), rel=1e-10)


def test_empty_block_normalizer_is_zero():
    assert iw_log_normalizer(3.0, np.zeros((0, 0))) == 0.0


def test_log_h_complete_graph_is_single_normalizer(rng):
    layout = BlockLayout((2, 1, 3))
    u = random_spd(layout.total, rng)
    params = HiwParams(5.0, u)
    g = DecomposableGraph.complete(3)
    assert log_h(params, layout, g.junction) == pytest.approx(iw_log_normalizer(5.0, u))


def test_log_h_ignores_clique_order(rng):
    # path 0-1-2-3 ordered left to right and right to left
    layout = BlockLayout((1, 2, 2, 1))
    params = HiwParams(4.0, random_spd(layout.total, rng))
    fwd = JunctionSequence(
        (mask_of([0, 1]), mask_of([1, 2]), mask_of([2, 3])), (mask_of([1]), mask_of([2]))
    )
    rev = JunctionSequence(
        (mask_of([2, 3]), mask_of([1, 2]), mask_of([0, 1])), (mask_of([2]), mask_of([1]))
    )
    assert log_h(params, layout, fwd) == pytest.approx(log_h(params, layout, rev), rel=1e-12)


def test_posterior_update(rng):
    params = HiwParams(5.0, np.eye(3))
    x = rng.standard_normal((7, 3))
    c0 = np.array([0.1, -0.2, 0.3])
    post = hiw_posterior_update(params, x, c0)
    assert post.delta == 12.0
    assert np.allclose(post.scale, np.eye(3) + (x - c0).T @ (x - c0))
    with pytest.raises(DimensionMismatchError):
        hiw_posterior_update(params, x[:, :2], c0)


def test_params_validation():
    with pytest.raises(DomainError):
        HiwParams(0.5, np.eye(2))
    with pytest.raises(DimensionMismatchError):
        HiwParams(3.0, np.ones((2, 3)))


def test_iw_draw_rejects_indefinite_scale(rng):
    with pytest.raises(NotSPDError):
        sample_iw_dawid(5.0, np.array([[1.0, 2.0], [2.0, 1.0]]), rng)


def test_iw_mean(rng):
    # E(Q) = U / (delta - 2) in the Dawid parameterization
    u = random_spd(3, rng)
    delta = 8.0
    draws = np.array([sample_iw_dawid(delta, u, rng) for _ in range(20000)])
    mean = draws.mean(axis=0)
    se = draws.std(axis=0) / np.sqrt(len(draws))
    assert np.all(np.abs(mean - u / (delta - 2)) < 4 * se)


def test_two_clique_path_has_markov_zero(rng):
    layout = BlockLayout((1, 1, 1))
    g = DecomposableGraph.from_edges(3, [(0, 1), (1, 2)])
    draw = sample_hiw_completed(HiwParams(5.0, random_spd(3, rng)), layout, g, rng)
    k = np.linalg.inv(draw.matrix)
    assert abs(k[0, 2]) < 1e-10 * np.sqrt(k[0, 0] * k[2, 2])
    assert draw.precision[0, 2] == 0.0


def test_completion_keeps_clique_blocks(rng):
    layout = BlockLayout((2, 1, 2))
    g = DecomposableGraph.from_edges(3, [(0, 1), (1, 2)])
    full = random_spd(layout.total, rng)
    q, k = markov_completion(full, layout, g.junction)
    for m in g.junction.clique_masks:
        idx = layout.indices(m)
        assert np.allclose(q[np.ix_(idx, idx)], full[np.ix_(idx, idx)])
    assert np.allclose(np.linalg.inv(q), k)


def test_completed_clique_marginals_are_iw(rng):
    # each clique block of an HIW draw is marginally IW(delta, U_C); compare means
    layout = BlockLayout((1, 2, 1))
    g = DecomposableGraph.from_edges(3, [(0, 1), (1, 2)])
    u = random_spd(layout.total, rng)
    delta = 9.0
    draws = np.array([sample_hiw_completed(HiwParams(delta, u), layout, g, rng).matrix for _ in range(20000)])
    mean, se = draws.mean(axis=0), draws.std(axis=0) / np.sqrt(len(draws))
    for m in g.junction.clique_masks:
        idx = np.ix_(layout.indices(m), layout.indices(m))
        assert np.all(np.abs(mean[idx] - u[idx] / (delta - 2)) < 4 * se[idx])


@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_completed_draws_are_spd_with_markov_zeros(seed, p):
    rng = np.random.default_rng(seed)
    g = DecomposableGraph.from_edges(p, random_chordal_edges(p, rng))
    layout = BlockLayout(tuple(rng.integers(1, 4, size=p)))
    params = HiwParams(float(rng.uniform(1, 10)), random_spd(layout.total, rng))
    draw = sample_hiw_completed(params, layout, g, rng)
    np.linalg.cholesky(draw.matrix)
    k = np.linalg.inv(draw.matrix)
    scale = np.sqrt(np.outer(np.diag(k), np.diag(k)))
    for i in range(p):
        for j in range(i + 1, p):
            if not g.has_edge(i, j):
                blk = np.ix_(layout.indices(1 << i), layout.indices(1 << j))
                assert np.max(np.abs(k[blk]) / scale[blk]) < 1e-8


@given(st.integers(0, 2**32 - 1))
def test_posterior_update_stays_valid(seed):
    rng = np.random.default_rng(seed)
    params = HiwParams(3.0, random_spd(4, rng))
    post = hiw_posterior_update(params, rng.standard_normal((5, 4)), np.zeros(4))
    np.linalg.cholesky(post.scale)
    assert post.delta == params.delta + 5
