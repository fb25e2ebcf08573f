"""Small-world Metropolis-Hastings over decomposable graphs.

``run_algorithm1`` samples G given fixed coefficients (smooth data).
``run_algorithm2`` is the Gibbs sampler for noisy coefficients: it alternates
a graph MH step, a completed HIW draw of Q and a draw of the latent
coefficients.

Local proposals pick add or delete with probability 1/2 each, then a legal
move of that class uniformly.  When a class is empty the other one is used
with probability 1, and the Hastings correction uses the actual legal-move
counts in both graphs.  Global proposals draw uniformly from all decomposable
graphs and are only available for small p.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatchError, TooLargeError
from .graph import P_ENUM_MAX, DecomposableGraph, MoveSet, enumerate_decomposable
from .hiw import CovarianceDraw, HiwParams, cholesky, hiw_posterior_update, sample_hiw_completed
from .likelihood import CoefficientDataset, GraphPrior, GraphScorer, log_graph_prior

log = logging.getLogger(__name__)


@dataclass
class McmcConfig:
    iterations: int = 5000
    burn_in: int = 0
    global_prob: float = 0.0
    prior: GraphPrior | None = None
    seed: int = 0
    chains: int = 1
    p_enum_max: int = P_ENUM_MAX
    thin: int = 10  # latent coefficient / Q retention interval (algorithm 2)
    proposal: str = "exact"  # or "simplified": (P - n_e) / (n_e + 1)
    check_chordal: bool = False

    def __post_init__(self):
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError(f"need 0 <= burn_in < iterations, got {self.burn_in}, {self.iterations}")
        if not 0.0 <= self.global_prob <= 1.0:
            raise ValueError(f"global_prob must be in [0, 1], got {self.global_prob}")
        if self.proposal not in ("exact", "simplified"):
            raise ValueError(f"unknown proposal correction {self.proposal!r}")
        if self.chains < 1 or self.thin < 1:
            raise ValueError("chains and thin must be >= 1")


@dataclass(frozen=True)
class NoiseModel:
    lambda_diag: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambda_diag, dtype=float)
        if lam.ndim != 1 or not np.all(lam > 0):
            raise ValueError("noise variances must be a positive vector")
        object.__setattr__(self, "lambda_diag", lam)

    @classmethod
    def from_node_variances(cls, s2, truncations) -> "NoiseModel":
        return cls(np.repeat(np.asarray(s2, dtype=float), truncations))


@dataclass
class ChainTrace:
    p: int
    sweeps: list[int] = field(default_factory=list)
    graphs: list[DecomposableGraph] = field(default_factory=list)
    log_posts: list[float] = field(default_factory=list)
    accepts: list[bool] = field(default_factory=list)
    seed: tuple[int, int] = (0, 0)  # (master seed, chain index)
    latent: list[np.ndarray] = field(default_factory=list)
    covariances: list[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.graphs)

    def edge_indicators(self) -> np.ndarray:
        """(sweeps, p, p) boolean adjacency stack."""
        out = np.zeros((len(self.graphs), self.p, self.p), dtype=bool)
        cache: dict[int, np.ndarray] = {}
        for k, g in enumerate(self.graphs):
            a = cache.get(id(g))
            if a is None:
                a = cache[id(g)] = g.adjacency_matrix()
            out[k] = a
        return out

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepts)) if self.accepts else float("nan")


def mh_accept(log_post_prop: float, log_post_cur: float, log_proposal_ratio: float, rng: np.random.Generator) -> bool:
    """Accept with probability min(1, exp(prop - cur + proposal ratio))."""
    u = rng.random()
    a = log_post_prop - log_post_cur + log_proposal_ratio
    if np.isnan(a) or a == -np.inf:
        return False
    return a >= 0 or np.log(u) < a


class _GraphChain:
    """Current graph state plus caches shared across MH steps."""

    def __init__(self, graph: DecomposableGraph, prior: GraphPrior, config: McmcConfig):
        self.graph = graph
        self.prior = prior
        self.config = config
        self.p = graph.p
        self.pairs = self.p * (self.p - 1) // 2
        self.log_edge = prior.log_edge_ratio()
        self._moves: dict[tuple[int, ...], MoveSet] = {}
        self.moves = self._moveset(graph)
        self.global_graphs = None
        if config.global_prob > 0:
            if self.p > config.p_enum_max:
                raise TooLargeError(f"global moves need p <= {config.p_enum_max}, got p={self.p}")
            self.global_graphs = enumerate_decomposable(self.p, config.p_enum_max)
        self.scorer: GraphScorer | None = None
        self.log_post = np.nan

    def _moveset(self, g: DecomposableGraph) -> MoveSet:
        ms = self._moves.get(g.adj)
        if ms is None:
            if len(self._moves) > 20000:
                self._moves.clear()
            ms = self._moves[g.adj] = MoveSet(g.p, g.adj)
        return ms

    def set_scorer(self, scorer: GraphScorer) -> None:
        self.scorer = scorer
        self.log_post = scorer.graph_score(self.graph) + log_graph_prior(self.prior, self.graph)

    def _class_prob(self, ms: MoveSet, kind: str) -> float:
        own = ms.n_add if kind == "add" else ms.n_delete
        other = ms.n_delete if kind == "add" else ms.n_add
        if own == 0:
            return 0.0
        return 1.0 if other == 0 else 0.5

    def step(self, rng: np.random.Generator) -> bool:
        if self.global_graphs is not None and rng.random() < self.config.global_prob:
            return self._global_step(rng)
        return self._local_step(rng)

    def _local_step(self, rng):
        ms = self.moves
        if ms.n_add == 0 and ms.n_delete == 0:
            rng.random()
            return False
        if ms.n_delete == 0:
            kind = "add"
        elif ms.n_add == 0:
            kind = "delete"
        else:
            kind = "add" if rng.random() < 0.5 else "delete"
        g = self.graph
        if kind == "add":
            i, j = ms.sample_add(rng)
            new = g.toggled(i, j, check=self.config.check_chordal)
            d_lik = self.scorer.add_delta(g.adj, i, j)
            d_prior = self.log_edge
        else:
            i, j = ms.sample_delete(rng)
            new = g.toggled(i, j, check=self.config.check_chordal)
            d_lik = -self.scorer.add_delta(new.adj, i, j)
            d_prior = -self.log_edge
        new_ms = self._moveset(new)
        if self.config.proposal == "exact":
            rev = "delete" if kind == "add" else "add"
            fwd = np.log(self._class_prob(ms, kind)) - np.log(ms.n_add if kind == "add" else ms.n_delete)
            bwd = np.log(self._class_prob(new_ms, rev)) - np.log(new_ms.n_add if rev == "add" else new_ms.n_delete)
            log_q = bwd - fwd
        else:
            ne = g.n_edges
            log_q = np.log((self.pairs - ne) / (ne + 1)) if kind == "add" else np.log(ne / (self.pairs - ne + 1))
        prop = self.log_post + d_lik + d_prior
        if mh_accept(prop, self.log_post, log_q, rng):
            self.graph, self.moves, self.log_post = new, new_ms, prop
            return True
        return False

    def _global_step(self, rng):
        new = self.global_graphs[int(rng.integers(len(self.global_graphs)))]
        prop = self.scorer.graph_score(new) + log_graph_prior(self.prior, new)
        if mh_accept(prop, self.log_post, 0.0, rng):
            self.graph, self.log_post = new, prop
            self.moves = self._moveset(new)
            return True
        return False


def _check_inputs(data: CoefficientDataset, params: HiwParams, initial: DecomposableGraph):
    if params.scale.shape[0] != data.layout.total:
        raise DimensionMismatchError(f"U is {params.scale.shape}, data dimension {data.layout.total}")
    if initial.p != data.layout.p:
        raise DimensionMismatchError(f"initial graph has p={initial.p}, layout p={data.layout.p}")


def _rng_for(config: McmcConfig, chain: int) -> np.random.Generator:
    seq = np.random.SeedSequence(config.seed).spawn(chain + 1)[chain]
    return np.random.default_rng(seq)


def run_algorithm1(
    data: CoefficientDataset,
    params: HiwParams,
    config: McmcConfig,
    initial: DecomposableGraph | None = None,
    chain: int = 0,
) -> ChainTrace:
    """Small-world MH targeting p(G | c) for fixed coefficient data."""
    initial = initial or DecomposableGraph.empty(data.layout.p)
    _check_inputs(data, params, initial)
    prior = config.prior or GraphPrior.default(initial.p)
    rng = _rng_for(config, chain)
    state = _GraphChain(initial, prior, config)
    state.set_scorer(GraphScorer.from_data(data, params))
    trace = ChainTrace(initial.p, seed=(config.seed, chain))
    for sweep in range(config.iterations):
        accepted = state.step(rng)
        if sweep >= config.burn_in:
            trace.sweeps.append(sweep)
            trace.graphs.append(state.graph)
            trace.log_posts.append(float(state.log_post))
            trace.accepts.append(accepted)
    log.debug("chain %d acceptance %.3f", chain, trace.acceptance_rate)
    return trace


def step3_sample_coeffs(
    d: np.ndarray, c0: np.ndarray, q: CovarianceDraw, noise: NoiseModel, rng: np.random.Generator
) -> np.ndarray:
    """Draw c_i ~ N(mu_i, V), V = inv(inv(Lambda) + inv(Q)), mu_i = V (inv(Lambda) d_i + inv(Q) c0).

    Works on one vector or an (n, D) stack; the Cholesky factor of V's
    inverse is shared by all rows.
    """
    d = np.asarray(d, dtype=float)
    single = d.ndim == 1
    d2 = np.atleast_2d(d)
    lam_inv = 1.0 / noise.lambda_diag
    prec = q.precision + np.diag(lam_inv)
    l = cholesky(prec)
    rhs = d2 * lam_inv + q.precision @ c0
    mu = solve_triangular(l.T, solve_triangular(l, rhs.T, lower=True), lower=False).T
    z = rng.standard_normal(d2.shape)
    out = mu + solve_triangular(l.T, z.T, lower=False).T
    return out[0] if single else out


def run_algorithm2(
    noisy: CoefficientDataset,
    params: HiwParams,
    noise: NoiseModel,
    config: McmcConfig,
    initial: DecomposableGraph | None = None,
    chain: int = 0,
) -> ChainTrace:
    """Gibbs sampler over (G, Q, latent coefficients) for noisy coefficients."""
    initial = initial or DecomposableGraph.empty(noisy.layout.p)
    _check_inputs(noisy, params, initial)
    if noise.lambda_diag.shape != (noisy.layout.total,):
        raise DimensionMismatchError("noise variances must have one entry per coefficient")
    prior = config.prior or GraphPrior.default(initial.p)
    rng = _rng_for(config, chain)
    state = _GraphChain(initial, prior, config)
    c = noisy.samples.copy()
    c0 = noisy.mean
    layout = noisy.layout
    trace = ChainTrace(initial.p, seed=(config.seed, chain))
    for sweep in range(config.iterations):
        post = hiw_posterior_update(params, c, c0)
        state.set_scorer(GraphScorer(params, post, c.shape[0], layout))
        accepted = state.step(rng)
        q = sample_hiw_completed(post, layout, state.graph, rng)
        c = step3_sample_coeffs(noisy.samples, c0, q, noise, rng)
        if sweep >= config.burn_in:
            trace.sweeps.append(sweep)
            trace.graphs.append(state.graph)
            trace.log_posts.append(float(state.log_post))
            trace.accepts.append(accepted)
            if (sweep - config.burn_in) % config.thin == 0:
                trace.latent.append(c.copy())
                trace.covariances.append(q.matrix)
    return trace


def _run_one(args):
    kind, payload, chain = args
    if kind == "smooth":
        data, params, config, initial = payload
        return run_algorithm1(data, params, config, initial, chain=chain)
    data, params, noise, config, initial = payload
    return run_algorithm2(data, params, noise, config, initial, chain=chain)


def run_chains(
    data: CoefficientDataset,
    params: HiwParams,
    config: McmcConfig,
    initial: DecomposableGraph | None = None,
    noise: NoiseModel | None = None,
) -> list[ChainTrace]:
    """Run ``config.chains`` independent chains; child seeds come from the master seed."""
    if noise is None:
        jobs = [("smooth", (data, params, config, initial), k) for k in range(config.chains)]
    else:
        jobs = [("noisy", (data, params, noise, config, initial), k) for k in range(config.chains)]
    if config.chains == 1:
        return [_run_one(jobs[0])]
    with ProcessPoolExecutor(max_workers=config.chains) as pool:
        return list(pool.map(_run_one, jobs))


