"""End-to-end fitting: curves to basis coefficients to graph posterior draws."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .basis import (
    BasisSystem,
    FunctionalDataset,
    NoiseEstimate,
    coefficient_dataset,
    estimate_noise_variance,
    fpca,
    fve_truncations,
    project_basis,
)
from .errors import BadConfigError, TooLargeError
from .graph import P_ENUM_MAX, DecomposableGraph
from .hiw import HiwParams
from .likelihood import CoefficientDataset, GraphPrior
from .sampler import ChainTrace, McmcConfig, NoiseModel, run_chains

MODES = ("smooth", "noisy")
BASES = ("fpca", "fourier", "scores")
INITS = ("empty", "complete")


@dataclass
class FitConfig:
    """Fitting options.  ``None`` fields are filled from p by :meth:`resolved`.

    ``iters`` counts retained sweeps; the chain runs ``burnin + iters`` sweeps.
    """

    mode: str = "smooth"
    basis: str = "fpca"
    fve: float = 0.9
    fourier_m: int = 5
    delta: float = 5.0
    q: float | None = None
    edge_prob: float | None = None
    iters: int | None = None
    burnin: int | None = None
    chains: int = 1
    seed: int = 0
    init: str | None = None
    thin: int = 10
    proposal: str = "exact"
    noise_bandwidth: float = 0.1

    def __post_init__(self):
        if self.mode not in MODES:
            raise BadConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.basis not in BASES:
            raise BadConfigError(f"basis must be one of {BASES}, got {self.basis!r}")
        if self.init is not None and self.init not in INITS:
            raise BadConfigError(f"init must be one of {INITS}, got {self.init!r}")
        if self.mode == "noisy" and self.basis == "scores":
            raise BadConfigError("noisy mode needs curves to estimate the noise variance")
        if not 0 < self.fve <= 1:
            raise BadConfigError(f"fve must be in (0, 1], got {self.fve}")
        if self.delta < 1:
            raise BadConfigError(f"delta must be >= 1, got {self.delta}")
        if self.q is not None and not 0 <= self.q <= 1:
            raise BadConfigError(f"q must be in [0, 1], got {self.q}")
        if self.iters is not None and self.iters < 1:
            raise BadConfigError("iters must be positive")
        if self.burnin is not None and self.burnin < 0:
            raise BadConfigError("burnin must be non-negative")

    def resolved(self, p: int) -> "FitConfig":
        """Copy with the p-dependent defaults filled in."""
        small = p <= P_ENUM_MAX
        out = FitConfig(**asdict(self))
        if out.q is None:
            out.q = 0.1 if small else 0.0
        elif out.q > 0 and not small:
            raise TooLargeError(f"global moves need p <= {P_ENUM_MAX}, got p={p}")
        if out.iters is None:
            out.iters = 5000 if small else 30000
        if out.burnin is None:
            out.burnin = 0 if small else 10000
        if out.init is None:
            out.init = "complete" if small else "empty"
        return out

    def mcmc(self, p: int) -> McmcConfig:
        r = self.resolved(p)
        prior = GraphPrior.default(p) if r.edge_prob is None else GraphPrior("bernoulli", r.edge_prob)
        return McmcConfig(
            iterations=r.burnin + r.iters,
            burn_in=r.burnin,
            global_prob=r.q,
            prior=prior,
            seed=r.seed,
            chains=r.chains,
            thin=r.thin,
            proposal=r.proposal,
        )

    def initial_graph(self, p: int) -> DecomposableGraph:
        init = self.resolved(p).init
        return DecomposableGraph.complete(p) if init == "complete" else DecomposableGraph.empty(p)


@dataclass
class FitResult:
    coefficients: CoefficientDataset
    params: HiwParams
    traces: list[ChainTrace]
    config: FitConfig  # resolved
    basis: BasisSystem | None = None
    noise: NoiseEstimate | None = None


def extract_coefficients(data: FunctionalDataset, config: FitConfig):
    """Basis coefficients, prior scale U and (noisy mode) the noise estimate."""
    noise = estimate_noise_variance(data, config.noise_bandwidth) if config.mode == "noisy" else None
    if config.basis == "fpca":
        system, scores = fpca(data, noise_var=None if noise is None else noise.sigma2)
        ms = fve_truncations(system, config.fve)
        coefs = coefficient_dataset(scores, ms)
        lam = np.concatenate([ev[:m] for ev, m in zip(system.eigenvalues, ms)])
    elif config.basis == "fourier":
        ms = [config.fourier_m] * data.p
        system, scores = project_basis(data, ms, center=True)
        coefs = coefficient_dataset(scores, ms)
        lam = coefs.samples.var(axis=0, ddof=1)
        if noise is not None:
            lam = lam - np.repeat(noise.coef_var, ms)
    else:
        raise BadConfigError("basis 'scores' takes a coefficient dataset, not curves")
    # floor keeps U positive definite when a component carries almost no signal
    lam = np.maximum(lam, 1e-8 * max(float(np.max(lam)), 1e-300))
    return coefs, HiwParams(config.delta, np.diag(lam)), system, noise


def fit_coefficients(
    coefs: CoefficientDataset,
    config: FitConfig,
    params: HiwParams | None = None,
    noise: NoiseModel | None = None,
) -> FitResult:
    """Run the chains on a coefficient dataset (smooth mode unless ``noise`` is given)."""
    p = coefs.layout.p
    resolved = config.resolved(p)
    if params is None:
        lam = coefs.samples.var(axis=0, ddof=1)
        params = HiwParams(config.delta, np.diag(np.maximum(lam, 1e-12)))
    traces = run_chains(coefs, params, config.mcmc(p), config.initial_graph(p), noise=noise)
    return FitResult(coefs, params, traces, resolved)


def fit_functional(data: FunctionalDataset, config: FitConfig) -> FitResult:
    coefs, params, system, noise = extract_coefficients(data, config)
    model = None
    if noise is not None:
        model = NoiseModel.from_node_variances(noise.coef_var, coefs.layout.truncations)
    result = fit_coefficients(coefs, config, params, model)
    result.basis = system
    result.noise = noise
    return result
