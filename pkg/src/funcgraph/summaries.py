"""Posterior summaries of graph traces: inclusion probabilities, accuracy
against a known truth, thresholded graphs and region/asymmetry statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyTraceError, MissingMetadataError
from .graph import DecomposableGraph
from .sampler import ChainTrace


def _stack(traces) -> np.ndarray:
    if isinstance(traces, ChainTrace):
        traces = [traces]
    mats = [t.edge_indicators() for t in traces if len(t)]
    if not mats:
        raise EmptyTraceError("no retained sweeps")
    return np.concatenate(mats, axis=0)


def inclusion_probs(traces) -> np.ndarray:
    """Per-edge frequency over retained sweeps (one trace or a list, pooled)."""
    return _stack(traces).mean(axis=0)


@dataclass(frozen=True)
class AccuracyStats:
    mis_rate: float
    sensitivity: float
    specificity: float
    mean_edges: float
    n_unique: int

    def as_row(self) -> dict[str, float]:
        return {"MisR": self.mis_rate, "Sen": self.sensitivity, "Spec": self.specificity, "nEdge": self.mean_edges}


def accuracy_stats(traces, truth: DecomposableGraph) -> AccuracyStats:
    """Mis-estimation rate, sensitivity, specificity and edge count, each averaged over sweeps.

    Sensitivity is detected / true edges; specificity is excluded / true
    non-edges.  Either is NaN when its denominator is zero.
    """
    stack = _stack(traces)
    p = truth.p
    if stack.shape[1] != p:
        raise DimensionMismatchError(f"trace has p={stack.shape[1]}, truth p={p}")
    iu = np.triu_indices(p, 1)
    est = stack[:, iu[0], iu[1]]
    true = truth.adjacency_matrix()[iu]
    n_true = int(true.sum())
    n_non = len(true) - n_true
    mis = float(np.mean(est != true)) if len(true) else 0.0
    sen = float(est[:, true].sum(axis=1).mean() / n_true) if n_true else float("nan")
    spec = float((~est[:, ~true]).sum(axis=1).mean() / n_non) if n_non else float("nan")
    unique = len({row.tobytes() for row in np.packbits(est, axis=1)})
    return AccuracyStats(mis, sen, spec, float(est.sum(axis=1).mean()), unique)


def threshold_graph(probs: np.ndarray, tau: float) -> list[tuple[int, int]]:
    """Edges with inclusion probability strictly above ``tau`` (not necessarily chordal)."""
    if not 0 <= tau <= 1:
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    probs = np.asarray(probs)
    i, j = np.triu_indices(probs.shape[0], 1)
    keep = probs[i, j] > tau
    return [(int(a), int(b)) for a, b in zip(i[keep], j[keep])]


def graph_frequencies(traces) -> dict[DecomposableGraph, float]:
    if isinstance(traces, ChainTrace):
        traces = [traces]
    counts: dict[DecomposableGraph, int] = {}
    total = 0
    for t in traces:
        for g in t.graphs:
            counts[g] = counts.get(g, 0) + 1
            total += 1
    if total == 0:
        raise EmptyTraceError("no retained sweeps")
    return {g: c / total for g, c in counts.items()}


def posterior_mode(traces) -> DecomposableGraph:
    freqs = graph_frequencies(traces)
    # ties go to the graph with the smaller sorted edge list
    return min(freqs, key=lambda g: (-freqs[g], g.edges))


@dataclass(frozen=True)
class NodeMetadata:
    """Region label per node and an optional mirror partner (-1 when absent)."""

    regions: tuple[str, ...]
    mirror: tuple[int, ...]

    def __post_init__(self):
        if len(self.regions) != len(self.mirror):
            raise DimensionMismatchError("regions and mirror must have one entry per node")
        p = len(self.mirror)
        for a, b in enumerate(self.mirror):
            if b < 0:
                continue
            if b >= p or self.mirror[b] != a:
                raise ValueError(f"mirror map is not an involution at node {a}")

    @property
    def p(self) -> int:
        return len(self.regions)

    @property
    def region_names(self) -> list[str]:
        return sorted(set(self.regions))


@dataclass
class RegionStats:
    """Per-sweep statistics; each array has one entry per retained sweep."""

    region_edges: dict[str, np.ndarray]
    total_edges: np.ndarray
    region_asymmetric: dict[str, np.ndarray]
    total_asymmetric: np.ndarray

    def columns(self) -> dict[str, np.ndarray]:
        out = {"total_edges": self.total_edges, "total_asymmetric": self.total_asymmetric}
        for r in sorted(self.region_edges):
            out[f"edges_{r}"] = self.region_edges[r]
            out[f"asym_{r}"] = self.region_asymmetric[r]
        return out


def _asymmetric_mask(adj: np.ndarray, mirror: np.ndarray) -> np.ndarray:
    """Upper-triangular mask of present edges whose mirrored edge is absent."""
    p = adj.shape[0]
    i, j = np.triu_indices(p, 1)
    present = adj[i, j]
    mi, mj = mirror[i], mirror[j]
    defined = (mi >= 0) & (mj >= 0)
    mirrored = np.zeros_like(present)
    mirrored[defined] = adj[mi[defined], mj[defined]]
    out = np.zeros((p, p), dtype=bool)
    out[i, j] = present & defined & ~mirrored
    return out


def region_asymmetry_stats(traces, meta: NodeMetadata) -> RegionStats:
    """Edge and asymmetric-edge counts per region and overall, per sweep.

    An edge counts towards every region containing one of its endpoints
    (once per region).  An edge (a, b) is asymmetric when both mirrors are
    defined and (mirror(a), mirror(b)) is absent; it is attributed to the
    regions of its own endpoints, so a lone edge without its mirror counts
    once.
    """
    stack = _stack(traces)
    p = stack.shape[1]
    if meta.p != p:
        raise MissingMetadataError(f"metadata covers {meta.p} nodes, trace has {p}")
    mirror = np.asarray(meta.mirror)
    regions = np.asarray(meta.regions)
    names = meta.region_names
    i, j = np.triu_indices(p, 1)
    touch = {r: (regions[i] == r) | (regions[j] == r) for r in names}
    region_edges = {r: np.zeros(len(stack), dtype=int) for r in names}
    region_asym = {r: np.zeros(len(stack), dtype=int) for r in names}
    total = np.zeros(len(stack), dtype=int)
    total_asym = np.zeros(len(stack), dtype=int)
    for k, adj in enumerate(stack):
        present = adj[i, j]
        asym = _asymmetric_mask(adj, mirror)[i, j]
        total[k] = present.sum()
        total_asym[k] = asym.sum()
        for r in names:
            region_edges[r][k] = (present & touch[r]).sum()
            region_asym[r][k] = (asym & touch[r]).sum()
    return RegionStats(region_edges, total, region_asym, total_asym)


@dataclass(frozen=True)
class GroupComparison:
    greater: float
    equal: float
    less: float


def compare_groups(stat_a: np.ndarray, stat_b: np.ndarray) -> GroupComparison:
    """P(A > B), P(A = B), P(A < B) pairing draw k of A with draw k of B.

    Valid when the two groups come from independent posteriors; the longer
    sequence is truncated to the shorter one.
    """
    a = np.asarray(stat_a)
    b = np.asarray(stat_b)
    k = min(len(a), len(b))
    if k == 0:
        raise EmptyTraceError("both groups need at least one draw")
    a, b = a[:k], b[:k]
    return GroupComparison(float(np.mean(a > b)), float(np.mean(a == b)), float(np.mean(a < b)))


__all__ = [
    "AccuracyStats",
    "GroupComparison",
    "NodeMetadata",
    "RegionStats",
    "accuracy_stats",
    "compare_groups",
    "graph_frequencies",
    "inclusion_probs",
    "posterior_mode",
    "region_asymmetry_stats",
    "threshold_graph",
]
