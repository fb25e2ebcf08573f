"""Decomposable (chordal) graphs, junction sequences and legal edge moves.

Graphs are undirected on nodes ``0..p-1`` and stored as a tuple of adjacency
bitmasks, one Python int per node.  Chordality is tested with maximum
cardinality search (MCS); ties are broken by lowest node index so every
derived quantity is deterministic.

Disconnected graphs are allowed: each connected component is decomposed on
its own and components are chained in the junction sequence with empty
separators.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Iterator

import numpy as np

from .errors import BadIndexError, IllegalMoveError, NonChordalError, TooLargeError

P_ENUM_MAX = 6

ADD = "add"
DELETE = "delete"
CROSS = "cross-component"
WITHIN = "within-component"


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(nodes: Iterable[int]) -> int:
    m = 0
    for v in nodes:
        m |= 1 << v
    return m


def mcs_order(p: int, adj: tuple[int, ...]) -> list[int]:
    """Maximum cardinality search visiting order, ties to the lowest index."""
    weight = [0] * p
    visited = 0
    order = []
    for _ in range(p):
        best, best_w = -1, -1
        for v in range(p):
            if not (visited >> v) & 1 and weight[v] > best_w:
                best, best_w = v, weight[v]
        order.append(best)
        visited |= 1 << best
        for u in iter_bits(adj[best] & ~visited):
            weight[u] += 1
    return order


def _is_complete(mask: int, adj: tuple[int, ...]) -> bool:
    for u in iter_bits(mask):
        if mask & ~adj[u] & ~(1 << u):
            return False
    return True


def _mcs_candidates(p: int, adj: tuple[int, ...]) -> list[int] | None:
    """Per-vertex sets {v} | earlier-visited neighbours, or None if not chordal."""
    order = mcs_order(p, adj)
    seen = 0
    cands = []
    for v in order:
        prior = adj[v] & seen
        if not _is_complete(prior, adj):
            return None
        cands.append(prior | (1 << v))
        seen |= 1 << v
    return cands


def _check_pairs(p: int, edges: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    if p < 1:
        raise BadIndexError(f"node count must be >= 1, got {p}")
    adj = [0] * p
    for e in edges:
        i, j = (int(x) for x in e)
        if not (0 <= i < p and 0 <= j < p):
            raise BadIndexError(f"edge {(i, j)} out of range for p={p}")
        if i == j:
            raise BadIndexError(f"self-loop at node {i}")
        adj[i] |= 1 << j
        adj[j] |= 1 << i
    return tuple(adj)


def is_decomposable(p: int, edges: Iterable[tuple[int, int]]) -> bool:
    adj = _check_pairs(p, edges)
    return _mcs_candidates(p, adj) is not None


@dataclass(frozen=True)
class JunctionSequence:
    """Perfectly ordered cliques C_1..C_m and separators S_2..S_m.

    ``separators[i]`` belongs to ``cliques[i + 1]``; empty separators link
    disconnected components.
    """

    clique_masks: tuple[int, ...]
    separator_masks: tuple[int, ...]

    @property
    def cliques(self) -> list[frozenset[int]]:
        return [frozenset(iter_bits(m)) for m in self.clique_masks]

    @property
    def separators(self) -> list[frozenset[int]]:
        return [frozenset(iter_bits(m)) for m in self.separator_masks]


def _junction_from_adj(p: int, adj: tuple[int, ...]) -> JunctionSequence:
    cands = _mcs_candidates(p, adj)
    if cands is None:
        raise NonChordalError("graph has a chordless cycle of length >= 4")
    cliques = []
    for i, c in enumerate(cands):
        # candidates can only be contained in later ones
        if any(c & d == c for d in cands[i + 1:]):
            continue
        cliques.append(c)
    seps = []
    hist = cliques[0]
    for c in cliques[1:]:
        seps.append(c & hist)
        hist |= c
    return JunctionSequence(tuple(cliques), tuple(seps))


class DecomposableGraph:
    """Immutable labeled chordal graph on nodes ``0..p-1``."""

    def __init__(self, p: int, adj: tuple[int, ...], *, check: bool = True):
        self.p = p
        self.adj = tuple(adj)
        if check and _mcs_candidates(p, self.adj) is None:
            raise NonChordalError("graph has a chordless cycle of length >= 4")

    @classmethod
    def from_edges(cls, p: int, edges: Iterable[tuple[int, int]]) -> "DecomposableGraph":
        return cls(p, _check_pairs(p, edges))

    @classmethod
    def empty(cls, p: int) -> "DecomposableGraph":
        return cls(p, (0,) * p, check=False)

    @classmethod
    def complete(cls, p: int) -> "DecomposableGraph":
        full = (1 << p) - 1
        return cls(p, tuple(full & ~(1 << v) for v in range(p)), check=False)

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((i, j) for i in range(self.p) for j in iter_bits(self.adj[i] >> (i + 1) << (i + 1)))

    @property
    def n_edges(self) -> int:
        return sum(m.bit_count() for m in self.adj) // 2

    def has_edge(self, i: int, j: int) -> bool:
        return bool((self.adj[i] >> j) & 1)

    @cached_property
    def junction(self) -> JunctionSequence:
        return _junction_from_adj(self.p, self.adj)

    def toggled(self, i: int, j: int, *, check: bool = True) -> "DecomposableGraph":
        adj = list(self.adj)
        adj[i] ^= 1 << j
        adj[j] ^= 1 << i
        return DecomposableGraph(self.p, tuple(adj), check=check)

    def apply(self, move: "EdgeMove") -> "DecomposableGraph":
        i, j = move.pair
        if self.has_edge(i, j) != (move.kind == DELETE):
            raise IllegalMoveError(f"{move.kind} of {move.pair} does not match the current edge state")
        legal = can_delete(self.adj, i, j) if move.kind == DELETE else can_add(self.adj, i, j)
        if not legal:
            raise IllegalMoveError(f"{move.kind} of {move.pair} would break decomposability")
        return self.toggled(i, j, check=False)

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.p, self.p), dtype=bool)
        for i, j in self.edges:
            a[i, j] = a[j, i] = True
        return a

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DecomposableGraph) and self.p == other.p and self.adj == other.adj

    def __hash__(self) -> int:
        return hash((self.p, self.adj))

    def __repr__(self) -> str:
        return f"DecomposableGraph(p={self.p}, edges={list(self.edges)})"


def build_graph(p: int, edges: Iterable[tuple[int, int]]) -> DecomposableGraph:
    return DecomposableGraph.from_edges(p, edges)


def junction_sequence(graph: DecomposableGraph) -> JunctionSequence:
    return graph.junction


def _component_of(adj: tuple[int, ...], v: int, blocked: int = 0) -> int:
    seen = 1 << v
    frontier = seen
    while frontier:
        nxt = 0
        for u in iter_bits(frontier):
            nxt |= adj[u]
        nxt &= ~seen & ~blocked
        seen |= nxt
        frontier = nxt
    return seen


def component_labels(p: int, adj: tuple[int, ...]) -> list[int]:
    labels = [-1] * p
    k = 0
    for v in range(p):
        if labels[v] < 0:
            for u in iter_bits(_component_of(adj, v)):
                labels[u] = k
            k += 1
    return labels


def connected_components(graph: DecomposableGraph) -> list[list[int]]:
    labels = component_labels(graph.p, graph.adj)
    comps: dict[int, list[int]] = {}
    for v, lab in enumerate(labels):
        comps.setdefault(lab, []).append(v)
    return list(comps.values())


def can_add(adj: tuple[int, ...], i: int, j: int) -> bool:
    """True iff adding the absent edge i-j keeps the graph chordal.

    The common neighbours of i and j must separate them.
    """
    common = adj[i] & adj[j]
    return not (_component_of(adj, i, blocked=common) >> j) & 1


def can_delete(adj: tuple[int, ...], i: int, j: int) -> bool:
    """True iff i-j lies in exactly one maximal clique."""
    return _is_complete(adj[i] & adj[j], adj)


@dataclass(frozen=True)
class EdgeMove:
    pair: tuple[int, int]
    kind: str
    case_tag: str | None = None


class MoveSet:
    """Legal single-edge toggles of a chordal graph.

    Adds between different components are always legal and are kept only as
    a count; they are sampled by rejection.
    """

    def __init__(self, p: int, adj: tuple[int, ...]):
        self.p = p
        self.adj = adj
        labels = component_labels(p, adj)
        self.labels = labels
        sizes: dict[int, int] = {}
        for lab in labels:
            sizes[lab] = sizes.get(lab, 0) + 1
        within_pairs = sum(s * (s - 1) // 2 for s in sizes.values())
        self.n_cross = p * (p - 1) // 2 - within_pairs
        members: dict[int, list[int]] = {}
        for v, lab in enumerate(labels):
            members.setdefault(lab, []).append(v)
        deletes = []
        adds = []
        for nodes in members.values():
            if len(nodes) < 2:
                continue
            for a, i in enumerate(nodes):
                ai = adj[i]
                for j in nodes[a + 1:]:
                    common = ai & adj[j]
                    if (ai >> j) & 1:
                        if _is_complete(common, adj):
                            deletes.append((i, j))
                    elif common and not (_component_of(adj, i, blocked=common) >> j) & 1:
                        adds.append((i, j))
        self.deletes = deletes
        self.within_adds = adds

    @property
    def n_add(self) -> int:
        return self.n_cross + len(self.within_adds)

    @property
    def n_delete(self) -> int:
        return len(self.deletes)

    def sample_add(self, rng: np.random.Generator) -> tuple[int, int]:
        k = int(rng.integers(self.n_add))
        if k < len(self.within_adds):
            return self.within_adds[k]
        labels = self.labels
        while True:
            i, j = (int(x) for x in rng.integers(self.p, size=2))
            if labels[i] != labels[j]:
                return (i, j) if i < j else (j, i)

    def sample_delete(self, rng: np.random.Generator) -> tuple[int, int]:
        return self.deletes[int(rng.integers(len(self.deletes)))]

    def moves(self) -> list[EdgeMove]:
        out = []
        labels = self.labels
        for i in range(self.p):
            for j in range(i + 1, self.p):
                if labels[i] != labels[j]:
                    out.append(EdgeMove((i, j), ADD, CROSS))
        out.extend(EdgeMove(e, ADD, WITHIN) for e in self.within_adds)
        out.extend(EdgeMove(e, DELETE) for e in self.deletes)
        return sorted(out, key=lambda m: (m.kind, m.pair))


def legal_moves(graph: DecomposableGraph) -> list[EdgeMove]:
    return MoveSet(graph.p, graph.adj).moves()


@lru_cache(maxsize=None)
def _enumerate(p: int) -> tuple[DecomposableGraph, ...]:
    pairs = list(combinations(range(p), 2))
    out = []
    for code in range(1 << len(pairs)):
        adj = [0] * p
        for b in iter_bits(code):
            i, j = pairs[b]
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        adj_t = tuple(adj)
        if _mcs_candidates(p, adj_t) is not None:
            out.append(DecomposableGraph(p, adj_t, check=False))
    return tuple(out)


def enumerate_decomposable(p: int, p_enum_max: int = P_ENUM_MAX) -> list[DecomposableGraph]:
    """All labeled chordal graphs on p nodes (61 for p=4, 822 for p=5)."""
    if p > p_enum_max:
        raise TooLargeError(f"enumeration limited to p <= {p_enum_max}, got {p}")
    if p < 1:
        raise BadIndexError("p must be >= 1")
    return list(_enumerate(p))
