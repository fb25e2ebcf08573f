"""Bayesian decomposable-graph inference for multivariate functional data."""

from .basis import (
    BasisSystem,
    FunctionalDataset,
    NoiseEstimate,
    coefficient_dataset,
    estimate_noise_variance,
    fourier_basis,
    fpca,
    fve_truncate,
    fve_truncations,
    project_basis,
)
from .errors import FuncGraphError
from .graph import DecomposableGraph, JunctionSequence, is_decomposable, junction_sequence, legal_moves
from .hiw import BlockLayout, HiwParams, hiw_posterior_update, log_h, sample_hiw_completed, sample_iw_dawid
from .likelihood import CoefficientDataset, GraphPrior, log_marginal_likelihood, log_ratio_edge_move
from .pipeline import FitConfig, FitResult, fit_coefficients, fit_functional
from .sampler import ChainTrace, McmcConfig, NoiseModel, run_algorithm1, run_algorithm2, run_chains
from .simulate import SimSpec, gen_smooth_dataset, sim_preset
from .summaries import NodeMetadata, accuracy_stats, inclusion_probs, posterior_mode, threshold_graph

__all__ = [
    "BasisSystem",
    "BlockLayout",
    "ChainTrace",
    "CoefficientDataset",
    "DecomposableGraph",
    "FitConfig",
    "FitResult",
    "FuncGraphError",
    "FunctionalDataset",
    "GraphPrior",
    "HiwParams",
    "JunctionSequence",
    "McmcConfig",
    "NodeMetadata",
    "NoiseEstimate",
    "NoiseModel",
    "SimSpec",
    "accuracy_stats",
    "coefficient_dataset",
    "estimate_noise_variance",
    "fit_coefficients",
    "fit_functional",
    "fourier_basis",
    "fpca",
    "fve_truncate",
    "fve_truncations",
    "gen_smooth_dataset",
    "hiw_posterior_update",
    "inclusion_probs",
    "is_decomposable",
    "junction_sequence",
    "legal_moves",
    "log_h",
    "log_marginal_likelihood",
    "log_ratio_edge_move",
    "posterior_mode",
    "project_basis",
    "run_algorithm1",
    "run_algorithm2",
    "run_chains",
    "sample_hiw_completed",
    "sample_iw_dawid",
    "sim_preset",
    "threshold_graph",
]
