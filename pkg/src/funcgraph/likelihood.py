"""Clique-factorized Gaussian likelihoods, HIW marginal likelihood and graph priors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, IllegalMoveError
from .graph import ADD, DELETE, DecomposableGraph, EdgeMove, can_add, can_delete, component_labels
from .hiw import (
    BlockLayout,
    CovarianceDraw,
    HiwParams,
    cholesky,
    hiw_posterior_update,
    iw_log_normalizer,
    log_h,
)

LOG_2PI = np.log(2 * np.pi)


@dataclass(frozen=True)
class CoefficientDataset:
    """n stacked truncated coefficient vectors, their prior mean and layout."""

    samples: np.ndarray
    mean: np.ndarray
    layout: BlockLayout

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.samples, dtype=float))
        c0 = np.asarray(self.mean, dtype=float)
        if x.shape[1] != self.layout.total or c0.shape != (self.layout.total,):
            raise DimensionMismatchError(
                f"samples {x.shape} / mean {c0.shape} do not match layout total {self.layout.total}"
            )
        if not np.all(np.isfinite(x)):
            raise ValueError("samples contain non-finite values")
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "mean", c0)

    @property
    def n(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class GraphPrior:
    kind: str = "bernoulli"
    edge_prob: float | None = None

    def __post_init__(self):
        if self.kind not in ("bernoulli", "uniform"):
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if self.kind == "bernoulli" and not (self.edge_prob is not None and 0 < self.edge_prob < 1):
            raise ValueError(f"bernoulli prior needs 0 < r < 1, got {self.edge_prob}")

    @classmethod
    def default(cls, p: int) -> "GraphPrior":
        """Bernoulli with r = 2/(p-1); falls back to r = 0.5 when that is not a probability (p <= 3)."""
        r = 2.0 / (p - 1) if p > 3 else 0.5
        return cls("bernoulli", r)

    def log_edge_ratio(self) -> float:
        """log p(G + e) - log p(G) for one added edge."""
        if self.kind == "uniform":
            return 0.0
        r = self.edge_prob
        return float(np.log(r) - np.log1p(-r))


def log_graph_prior(prior: GraphPrior, graph: DecomposableGraph) -> float:
    if prior.kind == "uniform":
        return 0.0
    r = prior.edge_prob
    ne = graph.n_edges
    total = graph.p * (graph.p - 1) // 2
    return ne * float(np.log(r)) + (total - ne) * float(np.log1p(-r))


class GraphScorer:
    """Memoized log marginal likelihood of node sets for fixed data and prior.

    ``set_score(A)`` is the per-set factor m(A) such that the log marginal
    likelihood of a graph is sum over cliques minus sum over separators.
    """

    def __init__(self, prior: HiwParams, posterior: HiwParams, n: int, layout: BlockLayout):
        self.prior = prior
        self.posterior = posterior
        self.n = n
        self.layout = layout
        self._cache: dict[int, float] = {0: 0.0}

    @classmethod
    def from_data(cls, data: CoefficientDataset, params: HiwParams) -> "GraphScorer":
        post = hiw_posterior_update(params, data.samples, data.mean)
        return cls(params, post, data.n, data.layout)

    def set_score(self, mask: int) -> float:
        val = self._cache.get(mask)
        if val is None:
            idx = self.layout.indices(mask)
            sub = np.ix_(idx, idx)
            val = (
                iw_log_normalizer(self.prior.delta, self.prior.scale[sub])
                - iw_log_normalizer(self.posterior.delta, self.posterior.scale[sub])
                - 0.5 * self.n * len(idx) * LOG_2PI
            )
            self._cache[mask] = val
        return val

    def graph_score(self, graph: DecomposableGraph) -> float:
        junc = graph.junction
        return sum(self.set_score(m) for m in junc.clique_masks) - sum(self.set_score(m) for m in junc.separator_masks)

    def add_delta(self, adj: tuple[int, ...], i: int, j: int) -> float:
        """Change in log marginal likelihood when the absent edge i-j is added.

        After the addition i and j share the unique clique C = {i, j} | S with
        S = common neighbours; the ratio is m(C) + m(S) - m(C - i) - m(C - j).
        With S empty (different components) this is the three-term form.
        """
        s = adj[i] & adj[j]
        c = s | (1 << i) | (1 << j)
        return (
            self.set_score(c)
            + self.set_score(s)
            - self.set_score(c & ~(1 << i))
            - self.set_score(c & ~(1 << j))
        )


def log_marginal_likelihood(data: CoefficientDataset, params: HiwParams, graph: DecomposableGraph) -> float:
    """-(n D / 2) log 2 pi + log h(delta, U) - log h(delta + n, U_tilde)."""
    if data.n == 0:
        return 0.0
    post = hiw_posterior_update(params, data.samples, data.mean)
    junc = graph.junction
    return -0.5 * data.n * data.layout.total * LOG_2PI + log_h(params, data.layout, junc) - log_h(post, data.layout, junc)


def log_ratio_edge_move(data: CoefficientDataset, params: HiwParams, graph: DecomposableGraph, move: EdgeMove) -> float:
    """log p(data | G_new) - log p(data | G) for one legal add or delete."""
    i, j = move.pair
    adj = graph.adj
    if move.kind == ADD:
        if graph.has_edge(i, j) or not can_add(adj, i, j):
            raise IllegalMoveError(f"cannot add {move.pair}")
        return _add_ratio(data, params, adj, i, j)
    if move.kind == DELETE:
        if not graph.has_edge(i, j) or not can_delete(adj, i, j):
            raise IllegalMoveError(f"cannot delete {move.pair}")
        after = graph.toggled(i, j, check=False).adj
        return -_add_ratio(data, params, after, i, j)
    raise IllegalMoveError(f"unknown move kind {move.kind!r}")


def _add_ratio(data, params, adj, i, j):
    post = hiw_posterior_update(params, data.samples, data.mean)
    layout = data.layout
    u, ut = params.scale, post.scale
    d0, d1 = params.delta, post.delta

    def term(mask):
        idx = layout.indices(mask)
        sub = np.ix_(idx, idx)
        return iw_log_normalizer(d0, u[sub]) - iw_log_normalizer(d1, ut[sub])

    ki, kj = 1 << i, 1 << j
    labels = component_labels(len(adj), adj)
    if labels[i] != labels[j]:
        # three blocks: (k,l), (k,k), (l,l)
        return term(ki | kj) - term(ki) - term(kj)
    s = adj[i] & adj[j]
    c = s | ki | kj
    return term(c) + term(s) - term(c & ~ki) - term(c & ~kj)


def log_markov_density(
    c: np.ndarray, c0: np.ndarray, q: CovarianceDraw | np.ndarray, graph: DecomposableGraph, layout: BlockLayout
) -> float:
    """Sum of clique Gaussian log densities minus separator ones."""
    c = np.asarray(c, dtype=float)
    c0 = np.asarray(c0, dtype=float)
    qm = q.matrix if isinstance(q, CovarianceDraw) else np.asarray(q, dtype=float)
    if c.shape != (layout.total,) or c0.shape != c.shape or qm.shape != (layout.total, layout.total):
        raise DimensionMismatchError("c, c0 and Q must match the layout")
    r = c - c0

    def gauss(mask):
        idx = layout.indices(mask)
        if len(idx) == 0:
            return 0.0
        l = cholesky(qm[np.ix_(idx, idx)])
        z = np.linalg.solve(l, r[idx])
        return -0.5 * (len(idx) * LOG_2PI + z @ z) - float(np.sum(np.log(np.diag(l))))

    junc = graph.junction
    return sum(gauss(m) for m in junc.clique_masks) - sum(gauss(m) for m in junc.separator_masks)


__all__ = [
    "CoefficientDataset",
    "GraphPrior",
    "GraphScorer",
    "log_graph_prior",
    "log_marginal_likelihood",
    "log_markov_density",
    "log_ratio_edge_move",
]
