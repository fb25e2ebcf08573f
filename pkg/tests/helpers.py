"""Small shared problems for sampler and summary tests."""

import numpy as np

from funcgraph.graph import enumerate_decomposable
from funcgraph.hiw import BlockLayout, HiwParams
from funcgraph.likelihood import CoefficientDataset, log_graph_prior, log_marginal_likelihood


def small_problem(seed=0, n=50):
    """p = 3, one coefficient per node, a correlated Gaussian sample."""
    rng = np.random.default_rng(seed)
    cov = np.array([[1.0, 0.6, 0.3], [0.6, 1.0, 0.5], [0.3, 0.5, 1.0]])
    x = rng.multivariate_normal(np.zeros(3), cov, size=n)
    return CoefficientDataset(x, x.mean(axis=0), BlockLayout((1, 1, 1))), HiwParams(5.0, np.eye(3))


def exact_posterior(data, params, prior):
    """Posterior over every decomposable graph by enumeration."""
    graphs = enumerate_decomposable(data.layout.p)
    logs = np.array([log_marginal_likelihood(data, params, g) + log_graph_prior(prior, g) for g in graphs])
    w = np.exp(logs - logs.max())
    return dict(zip(graphs, w / w.sum()))
