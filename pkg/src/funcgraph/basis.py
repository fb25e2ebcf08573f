"""From gridded curves to truncated basis coefficients.

Dense-grid FPCA with trapezoidal quadrature, Fourier projection, FVE
truncation and local-linear noise variance estimation.  Every node has its
own grid; all samples of a node share that grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllZeroError, DegenerateGridError, DimensionMismatchError, TooFewSamplesError
from .hiw import BlockLayout
from .likelihood import CoefficientDataset


@dataclass
class FunctionalDataset:
    """Curves per node: ``values[j]`` is (n, m_j), sampled on ``grids[j]``."""

    grids: list[np.ndarray]
    values: list[np.ndarray]

    def __post_init__(self):
        self.grids = [np.asarray(t, dtype=float) for t in self.grids]
        self.values = [np.atleast_2d(np.asarray(v, dtype=float)) for v in self.values]
        if len(self.grids) != len(self.values):
            raise DimensionMismatchError("one grid per node required")
        ns = {v.shape[0] for v in self.values}
        if len(ns) > 1:
            raise DimensionMismatchError(f"nodes disagree on sample count: {sorted(ns)}")
        for t, v in zip(self.grids, self.values):
            if t.ndim != 1 or len(t) < 4 or np.any(np.diff(t) <= 0):
                raise DegenerateGridError("grids need >= 4 strictly increasing points")
            if v.shape[1] != len(t):
                raise DimensionMismatchError(f"values have {v.shape[1]} columns for a grid of {len(t)}")
            if not np.all(np.isfinite(v)):
                raise ValueError("curve values must be finite")

    @property
    def p(self) -> int:
        return len(self.grids)

    @property
    def n(self) -> int:
        return self.values[0].shape[0]


@dataclass
class BasisSystem:
    """Per-node basis functions on the grid; columns are L2-orthonormal."""

    kind: str
    grids: list[np.ndarray]
    functions: list[np.ndarray]
    means: list[np.ndarray]
    eigenvalues: list[np.ndarray] | None = None
    total_variance: list[float] | None = None  # trace of the (denoised) covariance operator


def trapezoid_weights(t: np.ndarray) -> np.ndarray:
    dt = np.diff(t)
    w = np.zeros_like(t)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


def _sign_fix(phi: np.ndarray) -> np.ndarray:
    # make the largest-magnitude entry of each column positive
    rows = np.argmax(np.abs(phi), axis=0)
    signs = np.sign(phi[rows, np.arange(phi.shape[1])])
    signs[signs == 0] = 1.0
    return phi * signs


def fpca_node(t: np.ndarray, y: np.ndarray, noise_var: float | None = None):
    """FPCA of one node: (mean, eigenvalues, eigenfunctions, scores, total variance).

    The sample covariance C on the grid is turned into the symmetric matrix
    W^1/2 C W^1/2 (W = trapezoid weights) whose eigenvectors map back to
    L2-orthonormal eigenfunctions.  ``noise_var`` is subtracted from the
    diagonal of C first, removing white measurement noise.  The total
    variance is the trace before clamping, so leftover noise eigenvalues of
    either sign cancel instead of inflating it.
    """
    n = y.shape[0]
    if n < 2:
        raise TooFewSamplesError("FPCA needs at least two curves")
    w = trapezoid_weights(t)
    mean = y.mean(axis=0)
    yc = y - mean
    cov = yc.T @ yc / (n - 1)
    if noise_var is not None:
        cov = cov - noise_var * np.eye(len(t))
    sw = np.sqrt(w)
    evals, evecs = np.linalg.eigh(sw[:, None] * cov * sw[None, :])
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    total = float(max(evals.sum(), 0.0))
    evals[evals < 0] = 0.0
    phi = _sign_fix(evecs[:, order] / sw[:, None])
    scores = yc @ (w[:, None] * phi)
    return mean, evals, phi, scores, total


def fpca(data: FunctionalDataset, noise_var=None) -> tuple[BasisSystem, list[np.ndarray]]:
    """Eigenbasis and FPC scores for every node (all components kept)."""
    noise = [None] * data.p if noise_var is None else list(np.broadcast_to(noise_var, (data.p,)))
    means, evals, funcs, scores, totals = [], [], [], [], []
    for t, y, nv in zip(data.grids, data.values, noise):
        m, lam, phi, sc, tot = fpca_node(t, y, nv)
        means.append(m)
        evals.append(lam)
        funcs.append(phi)
        scores.append(sc)
        totals.append(tot)
    return BasisSystem("eigenbasis", list(data.grids), funcs, means, evals, totals), scores


def fourier_basis(t: np.ndarray, m: int) -> np.ndarray:
    """First m orthonormal Fourier functions on [t0, t_end]: 1, sin 1, cos 1, sin 2, ..."""
    a, b = t[0], t[-1]
    length = b - a
    x = (t - a) / length
    cols = [np.full_like(t, 1 / np.sqrt(length))]
    k = 1
    while len(cols) < m:
        cols.append(np.sqrt(2 / length) * np.sin(2 * np.pi * k * x))
        if len(cols) < m:
            cols.append(np.sqrt(2 / length) * np.cos(2 * np.pi * k * x))
        k += 1
    return np.column_stack(cols[:m])


def project_basis(data: FunctionalDataset, truncations, center: bool = False) -> tuple[BasisSystem, list[np.ndarray]]:
    """Trapezoidal inner products of each curve with the first M_j Fourier functions."""
    ms = list(np.broadcast_to(truncations, (data.p,)))
    funcs, means, scores = [], [], []
    for t, y, m in zip(data.grids, data.values, ms):
        phi = fourier_basis(t, int(m))
        w = trapezoid_weights(t)
        gram = phi.T @ (w[:, None] * phi)
        if np.max(np.abs(gram - np.eye(int(m)))) > 1e-3:
            raise DegenerateGridError("grid too coarse for the requested Fourier functions")
        mean = y.mean(axis=0) if center else np.zeros(len(t))
        scores.append((y - mean) @ (w[:, None] * phi))
        funcs.append(phi)
        means.append(mean)
    return BasisSystem("fourier", list(data.grids), funcs, means), scores


def reconstruct(system: BasisSystem, scores: list[np.ndarray]) -> list[np.ndarray]:
    return [mu + sc @ phi[:, : sc.shape[1]].T for mu, phi, sc in zip(system.means, system.functions, scores)]


def fve_truncate(eigenvalues, threshold: float, total: float | None = None) -> int:
    """Smallest M whose leading eigenvalues explain at least ``threshold`` of the total.

    ``total`` defaults to the sum of the (clamped) eigenvalues.
    """
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    lam = np.clip(np.asarray(eigenvalues, dtype=float), 0.0, None)
    total = lam.sum() if total is None else float(total)
    if total <= 0 or lam.sum() <= 0:
        raise AllZeroError("all eigenvalues are zero")
    frac = np.cumsum(lam) / total
    return int(min(np.searchsorted(frac, threshold - 1e-12) + 1, len(lam)))


def local_linear_matrix(t: np.ndarray, bandwidth: float) -> np.ndarray:
    """Hat matrix of the Epanechnikov local-linear smoother with half-width ``bandwidth``."""
    diff = t[None, :] - t[:, None]
    u = diff / bandwidth
    k = np.where(np.abs(u) < 1, 0.75 * (1 - u**2), 0.0)
    s1 = (k * diff).sum(axis=1)
    s2 = (k * diff**2).sum(axis=1)
    wts = k * (s2[:, None] - s1[:, None] * diff)
    return wts / wts.sum(axis=1, keepdims=True)


@dataclass
class NoiseEstimate:
    sigma2: np.ndarray  # per-node residual variance on the grid
    coef_var: np.ndarray  # per-node s_j^2 = sigma2 |T_j| / (m_j - 1)


def estimate_noise_variance(data: FunctionalDataset, bandwidth_frac: float = 0.1) -> NoiseEstimate:
    """White-noise variance per node from local-linear smoothing residuals.

    Residual sums of squares are divided by the residual degrees of freedom
    m - 2 tr(S) + tr(S^T S) of the smoother S.
    """
    sig = []
    scale = []
    for t, y in zip(data.grids, data.values):
        m = len(t)
        if m < 10:
            raise DegenerateGridError("noise estimation needs at least 10 grid points")
        width = t[-1] - t[0]
        s = local_linear_matrix(t, bandwidth_frac * width)
        resid = y - y @ s.T
        df = m - 2 * np.trace(s) + np.sum(s * s)
        sig.append(np.sum(resid**2) / (y.shape[0] * df))
        scale.append(width / (m - 1))
    sig = np.asarray(sig)
    return NoiseEstimate(sig, sig * np.asarray(scale))


def coefficient_dataset(scores: list[np.ndarray], truncations, mean: str = "sample") -> CoefficientDataset:
    """Stack the leading M_j scores of each node into a CoefficientDataset.

    ``mean="sample"`` uses the column means as c0, ``"zero"`` uses zeros.
    """
    ms = [int(m) for m in truncations]
    x = np.hstack([sc[:, :m] for sc, m in zip(scores, ms)])
    c0 = x.mean(axis=0) if mean == "sample" else np.zeros(x.shape[1])
    return CoefficientDataset(x, c0, BlockLayout(tuple(ms)))


def fve_truncations(system: BasisSystem, threshold: float) -> list[int]:
    """Per-node FVE truncation of an eigenbasis."""
    if system.eigenvalues is None:
        raise ValueError("FVE truncation needs an eigenbasis")
    totals = system.total_variance or [None] * len(system.eigenvalues)
    return [fve_truncate(lam, threshold, tot) for lam, tot in zip(system.eigenvalues, totals)]
