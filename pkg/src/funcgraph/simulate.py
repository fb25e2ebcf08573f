"""Synthetic multivariate functional data with a known decomposable graph.

Scores are drawn from N(0, Z R Z): Z holds per-node standard deviations
sqrt(lambda_jk) and R is a block correlation whose (i, j) block is a scaled
rectangular identity.  Curves are Fourier expansions of the scores plus a
common mean function, sampled on per-node uniform grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import FunctionalDataset, fourier_basis
from .errors import DimensionMismatchError, NotSPDError
from .graph import DecomposableGraph, iter_bits
from .hiw import BlockLayout, cholesky, markov_completion

SIX_NODE_EDGES = ((0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5))


def _sixty_node_edges() -> tuple[tuple[int, int], ...]:
    # 18 connected nodes spread over 0..59: a 4-clique grown by attaching each
    # new node to an existing 4-clique (9 times) or triangle (5 times)
    nodes = [3 * k + 2 for k in range(18)]
    edges = set()
    cliques4 = [tuple(nodes[:4])]
    for a in range(4):
        for b in range(a + 1, 4):
            edges.add((nodes[a], nodes[b]))
    for step, v in enumerate(nodes[4:]):
        base = cliques4[(7 * step) % len(cliques4)]
        attach = base[1:] if step in (2, 5, 8, 11, 13) else base  # triangle or 4-clique
        for u in attach:
            edges.add((min(u, v), max(u, v)))
        if len(attach) == 4:
            cliques4.append(tuple(attach[1:]) + (v,))
        else:
            cliques4.append(tuple(attach) + (v,))
    return tuple(sorted(edges))


def default_true_graphs() -> dict[str, DecomposableGraph]:
    """Shipped ground truths: 'six' (7 edges) and 'sixty' (57 edges, 42 singletons)."""
    return {
        "six": DecomposableGraph.from_edges(6, SIX_NODE_EDGES),
        "sixty": DecomposableGraph.from_edges(60, _sixty_node_edges()),
    }


@dataclass
class SimSpec:
    """Everything needed to regenerate a simulated dataset bit for bit."""

    p: int = 6
    n: int = 200
    m_range: tuple[int, int] = (3, 7)
    truncations: tuple[int, ...] | None = None
    graph: str | tuple[tuple[int, int], ...] = "six"
    eigen_shape: float = 2.0
    eigen_scale: float = 1.0
    eigen_decay: float = 0.2
    weight_range: tuple[float, float] = (0.45, 0.6)
    r0_method: str = "weights"  # or "clique": equicorrelated clique marginals
    clique_corr: float = 0.95
    grid_sizes: tuple[int, ...] = (100, 110, 120, 90, 105, 95)
    domain: tuple[float, float] = (0.0, 1.0)
    mean_amplitude: float = 22.0
    noise_mean: float | None = None
    noise_var: float | None = None
    fve: float = 0.9
    seed: int = 0
    true_graph: DecomposableGraph = field(init=False, repr=False)

    def __post_init__(self):
        if self.p < 1 or self.n < 1:
            raise ValueError("p and n must be positive")
        lo, hi = self.m_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad truncation range {self.m_range}")
        if isinstance(self.graph, str):
            catalog = default_true_graphs()
            if self.graph not in catalog:
                raise ValueError(f"unknown graph name {self.graph!r}; choose from {sorted(catalog)}")
            g = catalog[self.graph]
        else:
            g = DecomposableGraph.from_edges(self.p, [tuple(e) for e in self.graph])
        if g.p != self.p:
            raise DimensionMismatchError(f"graph has {g.p} nodes, spec has p={self.p}")
        self.true_graph = g
        if self.truncations is not None and len(self.truncations) != self.p:
            raise DimensionMismatchError("need one truncation per node")
        if (self.noise_mean is None) != (self.noise_var is None):
            raise ValueError("noise_mean and noise_var go together")
        if self.noise_mean is not None and not (self.noise_mean > 0 and self.noise_var > 0):
            raise ValueError("gamma noise parameters must be positive")
        if self.r0_method not in ("weights", "clique"):
            raise ValueError(f"unknown r0_method {self.r0_method!r}")
        if not 0 <= self.clique_corr < 1:
            raise ValueError("clique_corr must be in [0, 1)")

    def grid(self, j: int) -> np.ndarray:
        m = self.grid_sizes[j % len(self.grid_sizes)]
        return np.linspace(self.domain[0], self.domain[1], m)

    def mean_curve(self, t: np.ndarray) -> np.ndarray:
        a, b = self.domain
        x = (t - a) / (b - a)
        return self.mean_amplitude * (1.0 + 0.25 * np.sin(2 * np.pi * x))


def sim_preset(name: str, **overrides) -> SimSpec:
    """Named configurations for the three simulation studies."""
    presets = {
        "sim1": dict(),
        "sim2": dict(noise_mean=2.5, noise_var=0.25),
        "sim3": dict(
            p=60, n=55, graph="sixty", grid_sizes=(64,), fve=0.95, eigen_decay=1.0, r0_method="clique"
        ),
    }
    if name not in presets:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(presets)}")
    return SimSpec(**{**presets[name], **overrides})


def base_correlation(graph: DecomposableGraph, weight_range, rng: np.random.Generator, min_eig: float = 0.02):
    """Correlation R0 whose inverse vanishes exactly off the graph.

    K0 = I + A * W with weight magnitudes uniform on ``weight_range`` and
    random signs.  Signs are redrawn until K0 has smallest eigenvalue at
    least ``min_eig``; if that fails the off-diagonal part is shrunk instead.
    Returns (R0, K0 rescaled to be the exact inverse of R0).
    """
    p = graph.p
    edges = graph.edges
    lo, hi = weight_range
    mags = rng.uniform(lo, hi, size=len(edges))
    for _ in range(100):
        signs = np.where(rng.random(len(edges)) < 0.5, -1.0, 1.0)
        off = np.zeros((p, p))
        for (i, j), w in zip(edges, mags * signs):
            off[i, j] = off[j, i] = w
        if np.linalg.eigvalsh(np.eye(p) + off)[0] >= min_eig:
            break
    for _ in range(200):
        k = np.eye(p) + off
        if np.linalg.eigvalsh(k)[0] >= min_eig:
            break
        off *= 0.95
    else:
        raise NotSPDError("could not shrink weights to a positive definite precision")
    cov = np.linalg.inv(k)
    s = np.sqrt(np.diag(cov))
    r0 = cov / np.outer(s, s)
    np.fill_diagonal(r0, 1.0)
    return r0, k * np.outer(s, s)


def clique_correlation(graph: DecomposableGraph, rho: float) -> tuple[np.ndarray, np.ndarray]:
    """Markov completion of clique blocks that are equicorrelated at ``rho``.

    Dense cliques cap the partial correlations any I + A * W precision can
    reach, so strong dependence is instead specified on the clique marginals.
    """
    p = graph.p
    q = np.eye(p)
    for cmask in graph.junction.clique_masks:
        idx = list(iter_bits(cmask))
        q[np.ix_(idx, idx)] = rho
    np.fill_diagonal(q, 1.0)
    r0, k0 = markov_completion(q, BlockLayout((1,) * p), graph.junction)
    return r0, k0


def block_correlation(k0: np.ndarray, layout: BlockLayout) -> np.ndarray:
    """Block correlation R with (i, j) block proportional to a rectangular identity.

    Coefficient k of all nodes with M_j >= k forms an independent level whose
    precision is the principal submatrix of K0 on those nodes.  Each level's
    inverse is rescaled to unit diagonal, so the precision of R keeps exactly
    the zero blocks of K0 and level 1 reproduces R0.
    """
    d = layout.total
    r = np.zeros((d, d))
    m = np.asarray(layout.truncations)
    offs = np.asarray(layout.offsets)
    for level in range(int(m.max())):
        nodes = np.flatnonzero(m > level)
        cov = np.linalg.inv(k0[np.ix_(nodes, nodes)])
        s = np.sqrt(np.diag(cov))
        idx = offs[nodes] + level
        r[np.ix_(idx, idx)] = cov / np.outer(s, s)
    return r


@dataclass
class SimTruth:
    graph: DecomposableGraph
    layout: BlockLayout
    eigenvalues: list[np.ndarray]
    r0: np.ndarray
    covariance: np.ndarray
    scores: np.ndarray
    noise_variances: np.ndarray | None = None  # (n, p) per-curve variances


def _draw_truncations(spec: SimSpec, rng) -> tuple[int, ...]:
    if spec.truncations is not None:
        return tuple(int(m) for m in spec.truncations)
    lo, hi = spec.m_range
    return tuple(int(m) for m in rng.integers(lo, hi + 1, size=spec.p))


def gen_smooth_dataset(spec: SimSpec, rng: np.random.Generator | None = None) -> tuple[FunctionalDataset, SimTruth]:
    """Noise-free curves and their generating truth; seeded from ``spec.seed`` by default."""
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    layout = BlockLayout(_draw_truncations(spec, rng))
    # one gamma amplitude per node times a fixed exponential decay
    amp = rng.gamma(spec.eigen_shape, spec.eigen_scale, size=spec.p)
    eig = [a * np.exp(-spec.eigen_decay * np.arange(m)) for a, m in zip(amp, layout.truncations)]
    if spec.r0_method == "clique":
        r0, k0 = clique_correlation(spec.true_graph, spec.clique_corr)
    else:
        r0, k0 = base_correlation(spec.true_graph, spec.weight_range, rng)
    r = block_correlation(k0, layout)
    z = np.sqrt(np.concatenate(eig))
    q = r * np.outer(z, z)
    scores = rng.standard_normal((spec.n, layout.total)) @ cholesky(q).T
    grids, values = [], []
    for j in range(spec.p):
        t = spec.grid(j)
        phi = fourier_basis(t, layout.truncations[j])
        values.append(spec.mean_curve(t) + scores[:, layout.block(j)] @ phi.T)
        grids.append(t)
    data = FunctionalDataset(grids, values)
    truth = SimTruth(spec.true_graph, layout, eig, r0, q, scores)
    if spec.noise_mean is not None:
        data, var = add_noise(data, spec.noise_mean, spec.noise_var, rng)
        truth.noise_variances = var
    return data, truth


def add_noise(
    data: FunctionalDataset, gamma_mean: float, gamma_var: float, rng: np.random.Generator
) -> tuple[FunctionalDataset, np.ndarray]:
    """White noise whose variance is drawn per curve from a gamma law with the given mean and variance."""
    if not (gamma_mean > 0 and gamma_var >= 0):
        raise ValueError("gamma mean must be positive and variance non-negative")
    n, p = data.n, data.p
    if gamma_var == 0:
        var = np.full((n, p), float(gamma_mean))
    else:
        shape = gamma_mean**2 / gamma_var
        var = rng.gamma(shape, gamma_var / gamma_mean, size=(n, p))
    noisy = []
    for j, y in enumerate(data.values):
        noisy.append(y + rng.standard_normal(y.shape) * np.sqrt(var[:, j])[:, None])
    return FunctionalDataset(list(data.grids), noisy), var


def snr(clean: FunctionalDataset, noise_variances: np.ndarray, scale: str = "variance") -> float:
    """Mean over samples and grid points of |f(t)| divided by the noise variance (or SD)."""
    ratios = []
    for j, y in enumerate(clean.values):
        v = noise_variances[:, j]
        denom = v if scale == "variance" else np.sqrt(v)
        ratios.append((np.abs(y) / denom[:, None]).ravel())
    return float(np.mean(np.concatenate(ratios)))


def precision_zero_blocks(q: np.ndarray, layout: BlockLayout, graph: DecomposableGraph) -> float:
    """Largest relative entry of inv(Q) over blocks of non-adjacent node pairs."""
    k = np.linalg.inv(q)
    scale = np.sqrt(np.abs(np.outer(np.diag(k), np.diag(k))))
    worst = 0.0
    for i in range(graph.p):
        for j in iter_bits(((1 << graph.p) - 1) & ~graph.adj[i] & ~((1 << (i + 1)) - 1)):
            blk = layout.block(i), layout.block(j)
            worst = max(worst, float(np.max(np.abs(k[blk]) / scale[blk])))
    return worst


def with_seed(spec: SimSpec, seed: int) -> SimSpec:
    fields = {k: getattr(spec, k) for k in spec.__dataclass_fields__ if k != "true_graph"}
    return SimSpec(**{**fields, "seed": seed})


__all__ = [
    "SimSpec",
    "SimTruth",
    "add_noise",
    "base_correlation",
    "block_correlation",
    "clique_correlation",
    "default_true_graphs",
    "gen_smooth_dataset",
    "precision_zero_blocks",
    "sim_preset",
    "snr",
]
