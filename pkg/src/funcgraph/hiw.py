"""Inverse-Wishart and hyper-inverse-Wishart (HIW) machinery.

Inverse-Wishart matrices use Dawid's parameterization: ``Q ~ IW(delta, U)``
on d x d matrices iff ``inv(Q) ~ Wishart(delta + d - 1, inv(U))``.  Under it
every principal sub-block of Q is IW with the same ``delta`` and the
matching sub-block of U, which is what lets HIW densities factor over
cliques and separators.

Only ``delta >= 1`` is enforced.  ``delta > 4`` matters for the
infinite-dimensional construction, not for the finite truncations used here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from .errors import DimensionMismatchError, DomainError, NotSPDError
from .graph import DecomposableGraph, JunctionSequence, iter_bits

LOG_PI = np.log(np.pi)
LOG_2 = np.log(2.0)


@dataclass(frozen=True)
class BlockLayout:
    """Per-node truncation counts M_j and their coefficient index blocks."""

    truncations: tuple[int, ...]
    _index_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "truncations", tuple(int(m) for m in self.truncations))
        if any(m < 1 for m in self.truncations):
            raise ValueError(f"truncations must be >= 1, got {self.truncations}")

    @property
    def p(self) -> int:
        return len(self.truncations)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(self.truncations)[:-1]]))

    @property
    def total(self) -> int:
        return sum(self.truncations)

    def block(self, j: int) -> slice:
        return slice(self.offsets[j], self.offsets[j] + self.truncations[j])

    def indices(self, mask: int) -> np.ndarray:
        """Coefficient indices of the nodes in a node bitmask."""
        idx = self._index_cache.get(mask)
        if idx is None:
            parts = [np.arange(self.offsets[j], self.offsets[j] + self.truncations[j]) for j in iter_bits(mask)]
            idx = np.concatenate(parts) if parts else np.zeros(0, dtype=int)
            self._index_cache[mask] = idx
        return idx

    def node_of_index(self) -> np.ndarray:
        return np.repeat(np.arange(self.p), self.truncations)


@dataclass(frozen=True)
class HiwParams:
    delta: float
    scale: np.ndarray

    def __post_init__(self):
        if not self.delta >= 1:
            raise DomainError(f"delta must be >= 1, got {self.delta}")
        u = np.asarray(self.scale, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise DimensionMismatchError(f"scale must be square, got shape {u.shape}")
        object.__setattr__(self, "scale", u)


@dataclass(frozen=True)
class CovarianceDraw:
    """A Markov-completed covariance Q together with its sparse precision."""

    matrix: np.ndarray
    precision: np.ndarray
    graph: DecomposableGraph


def cholesky(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotSPDError(str(exc)) from None


def logdet_spd(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return 2.0 * float(np.sum(np.log(np.diag(cholesky(a)))))


def log_multigamma(b: int, a: float) -> float:
    """log Gamma_b(a) = b(b-1)/4 log(pi) + sum_{i<b} log Gamma(a - i/2); Gamma_0 = 1."""
    if b == 0:
        return 0.0
    if not a > (b - 1) / 2:
        raise DomainError(f"multivariate gamma needs a > (b-1)/2, got b={b}, a={a}")
    return b * (b - 1) / 4 * LOG_PI + float(np.sum(gammaln(a - np.arange(b) / 2)))


def iw_log_normalizer(delta: float, u: np.ndarray) -> float:
    """log of |U/2|^((delta+d-1)/2) / Gamma_d((delta+d-1)/2); zero for an empty block."""
    d = u.shape[0]
    if d == 0:
        return 0.0
    half = (delta + d - 1) / 2
    return half * (logdet_spd(u) - d * LOG_2) - log_multigamma(d, half)


def sample_iw_dawid(delta: float, u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw Q with inv(Q) ~ Wishart(delta + d - 1, inv(U)) by the Bartlett factor.

    With U = C C^T and Bartlett factor A, inv(Q) = C^{-T} A A^T C^{-1}, so
    Q = B B^T with B = C A^{-T}.
    """
    u = np.asarray(u, dtype=float)
    d = u.shape[0]
    c = cholesky(u)
    df = delta + d - 1
    a = np.zeros((d, d))
    a[np.diag_indices(d)] = np.sqrt(rng.chisquare(df - np.arange(d)))
    low = np.tril_indices(d, -1)
    a[low] = rng.standard_normal(len(low[0]))
    a_inv = solve_triangular(a, np.eye(d), lower=True)
    b = c @ a_inv.T
    return b @ b.T


def log_h(params: HiwParams, layout: BlockLayout, junction: JunctionSequence) -> float:
    """log of the HIW normalizer: clique terms minus separator terms."""
    u = params.scale
    total = 0.0
    for m in junction.clique_masks:
        idx = layout.indices(m)
        total += iw_log_normalizer(params.delta, u[np.ix_(idx, idx)])
    for m in junction.separator_masks:
        idx = layout.indices(m)
        total -= iw_log_normalizer(params.delta, u[np.ix_(idx, idx)])
    return total


def hiw_posterior_update(params: HiwParams, samples: np.ndarray, c0: np.ndarray) -> HiwParams:
    """Conjugate update: delta + n and U + sum_i (c_i - c0)(c_i - c0)^T."""
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    if x.size == 0:
        return params
    if x.shape[1] != params.scale.shape[0] or np.shape(c0) != (x.shape[1],):
        raise DimensionMismatchError(
            f"samples have {x.shape[1]} columns, c0 {np.shape(c0)}, scale {params.scale.shape}"
        )
    r = x - c0
    return HiwParams(params.delta + x.shape[0], params.scale + r.T @ r)


def _sample_conditional_block(delta, u, s_idx, r_idx, q_ss, rng):
    """Draw (Q_RS, Q_RR) given a fixed Q_SS for a clique with separator S.

    Under IW(delta, U) on S u R: Q_{R.S} ~ IW(delta + d_S, U_{R.S}) and
    B = inv(Q_SS) Q_SR ~ MN(inv(U_SS) U_SR, inv(U_SS), Q_{R.S}), both
    independent of Q_SS.
    """
    u_ss = u[np.ix_(s_idx, s_idx)]
    u_sr = u[np.ix_(s_idx, r_idx)]
    u_rr = u[np.ix_(r_idx, r_idx)]
    l_ss = cholesky(u_ss)
    w = solve_triangular(l_ss, u_sr, lower=True)
    mean_b = solve_triangular(l_ss.T, w, lower=False)
    u_r_s = u_rr - w.T @ w
    q_r_s = sample_iw_dawid(delta + len(s_idx), u_r_s, rng)
    z = rng.standard_normal((len(s_idx), len(r_idx)))
    # row covariance inv(U_SS) = L^{-T} L^{-1}
    b = mean_b + solve_triangular(l_ss.T, z, lower=False) @ cholesky(q_r_s).T
    q_sr = q_ss @ b
    q_rr = q_r_s + b.T @ q_ss @ b
    return q_sr, q_rr


def _embedded_inverse_sum(k: np.ndarray, q: np.ndarray, idx: np.ndarray, sign: float) -> None:
    if len(idx) == 0:
        return
    block = q[np.ix_(idx, idx)]
    l = cholesky(block)
    inv = solve_triangular(l, np.eye(len(idx)), lower=True)
    k[np.ix_(idx, idx)] += sign * (inv.T @ inv)


def markov_completion(q: np.ndarray, layout: BlockLayout, junction: JunctionSequence) -> tuple[np.ndarray, np.ndarray]:
    """Complete clique blocks of q into (Q, K) with K = inv(Q) zero off the graph."""
    d = layout.total
    k = np.zeros((d, d))
    for m in junction.clique_masks:
        _embedded_inverse_sum(k, q, layout.indices(m), 1.0)
    for m in junction.separator_masks:
        _embedded_inverse_sum(k, q, layout.indices(m), -1.0)
    k = (k + k.T) / 2
    l = cholesky(k)
    l_inv = solve_triangular(l, np.eye(d), lower=True)
    full = l_inv.T @ l_inv
    return (full + full.T) / 2, k


def sample_hiw_completed(
    params: HiwParams, layout: BlockLayout, graph: DecomposableGraph, rng: np.random.Generator
) -> CovarianceDraw:
    """Draw clique marginals along the perfect ordering, then Markov-complete."""
    u = params.scale
    if u.shape[0] != layout.total:
        raise DimensionMismatchError(f"scale is {u.shape}, layout total {layout.total}")
    junc = graph.junction
    q = np.zeros_like(u)
    for i, cmask in enumerate(junc.clique_masks):
        smask = junc.separator_masks[i - 1] if i > 0 else 0
        c_idx = layout.indices(cmask)
        if smask == 0:
            q[np.ix_(c_idx, c_idx)] = sample_iw_dawid(params.delta, u[np.ix_(c_idx, c_idx)], rng)
            continue
        s_idx = layout.indices(smask)
        r_idx = layout.indices(cmask & ~smask)
        q_sr, q_rr = _sample_conditional_block(params.delta, u, s_idx, r_idx, q[np.ix_(s_idx, s_idx)], rng)
        q[np.ix_(s_idx, r_idx)] = q_sr
        q[np.ix_(r_idx, s_idx)] = q_sr.T
        q[np.ix_(r_idx, r_idx)] = q_rr
    full, prec = markov_completion(q, layout, junc)
    return CovarianceDraw(full, prec, graph)
