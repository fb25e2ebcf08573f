"""File formats.  Node ids are 1-based in every file; floats are written with
``repr`` so that identical runs produce byte-identical output."""

from __future__ import annotations

import csv
import json
from collections.abc import Iterable, Sequence
from dataclasses import fields
from pathlib import Path
from typing import Any

import numpy as np

from .basis import FunctionalDataset
from .errors import BadConfigError, DimensionMismatchError
from .graph import DecomposableGraph
from .hiw import BlockLayout
from .likelihood import CoefficientDataset
from .sampler import ChainTrace
from .summaries import NodeMetadata


def fmt(x: float) -> str:
    return repr(float(x))


# graphs


def write_graph(path, graph: DecomposableGraph | tuple[int, Sequence[tuple[int, int]]]) -> None:
    """First line p, then one ``i j`` line per edge (1-based, i < j)."""
    p, edges = (graph.p, graph.edges) if isinstance(graph, DecomposableGraph) else graph
    lines = [str(p)] + [f"{i + 1} {j + 1}" for i, j in sorted(edges)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path) -> tuple[int, list[tuple[int, int]]]:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows or len(rows[0]) != 1:
        raise BadConfigError(f"{path}: first line must be the node count")
    p = int(rows[0][0])
    edges = []
    for r in rows[1:]:
        if len(r) != 2:
            raise BadConfigError(f"{path}: bad edge line {' '.join(r)!r}")
        edges.append((int(r[0]) - 1, int(r[1]) - 1))
    return p, edges


def read_graph(path) -> DecomposableGraph:
    p, edges = read_edge_list(path)
    return DecomposableGraph.from_edges(p, edges)


def write_dot(path, p: int, edges: Iterable[tuple[int, int]], probs: np.ndarray | None = None, name: str = "G") -> None:
    lines = [f"graph {name} {{"]
    lines += [f"  {v + 1};" for v in range(p)]
    for i, j in sorted(edges):
        attr = f' [label="{probs[i, j]:.3f}"]' if probs is not None else ""
        lines.append(f"  {i + 1} -- {j + 1}{attr};")
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n")


# functional data


def write_functional_csv(path, data: FunctionalDataset) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample_id", "node_id", "t", "value"])
        for i in range(data.n):
            for j, (t, y) in enumerate(zip(data.grids, data.values)):
                for tk, yk in zip(t, y[i]):
                    w.writerow([i + 1, j + 1, fmt(tk), fmt(yk)])


def read_functional_csv(path) -> FunctionalDataset:
    """Long format; each node's grid is the sorted set of its time points."""
    raw: dict[int, dict[int, dict[float, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"sample_id", "node_id", "t", "value"} - set(reader.fieldnames or [])
        if missing:
            raise BadConfigError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            node = raw.setdefault(int(row["node_id"]), {})
            node.setdefault(int(row["sample_id"]), {})[float(row["t"])] = float(row["value"])
    if not raw:
        raise BadConfigError(f"{path}: no rows")
    nodes = sorted(raw)
    if nodes != list(range(1, len(nodes) + 1)):
        raise BadConfigError(f"{path}: node ids must be 1..p")
    samples = sorted(raw[nodes[0]])
    grids, values = [], []
    for j in nodes:
        if sorted(raw[j]) != samples:
            raise DimensionMismatchError(f"node {j} has a different set of samples")
        t = np.array(sorted(raw[j][samples[0]]))
        rows = []
        for s in samples:
            obs = raw[j][s]
            if len(obs) != len(t) or any(tk not in obs for tk in t):
                raise DimensionMismatchError(f"node {j}, sample {s}: grid differs from the node's other samples")
            rows.append([obs[tk] for tk in t])
        grids.append(t)
        values.append(np.array(rows))
    return FunctionalDataset(grids, values)


# coefficient datasets and matrices


def write_dataset(path, data: CoefficientDataset, provenance: dict | None = None) -> None:
    """Coefficient CSV plus a JSON sidecar (``<path>.json``) with layout and c0."""
    layout = data.layout
    cols = [f"c_{j + 1}_{k + 1}" for j in range(layout.p) for k in range(layout.truncations[j])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample_id"] + cols)
        for i, row in enumerate(data.samples):
            w.writerow([i + 1] + [fmt(x) for x in row])
    side = {"truncations": list(layout.truncations), "mean": [float(x) for x in data.mean], "provenance": provenance or {}}
    Path(str(path) + ".json").write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")


def read_dataset(path) -> CoefficientDataset:
    side_path = Path(str(path) + ".json")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in r[1:]] for r in reader if r]
    x = np.array(rows, dtype=float).reshape(len(rows), len(header) - 1)
    if side_path.exists():
        side = json.loads(side_path.read_text())
        layout = BlockLayout(tuple(side["truncations"]))
        mean = np.asarray(side.get("mean", x.mean(axis=0)), dtype=float)
    else:
        # infer truncations from c_<node>_<k> column names
        counts: dict[int, int] = {}
        for name in header[1:]:
            parts = name.split("_")
            if len(parts) != 3:
                raise BadConfigError(f"{path}: cannot infer layout from column {name!r}")
            counts[int(parts[1])] = counts.get(int(parts[1]), 0) + 1
        layout = BlockLayout(tuple(counts[j] for j in sorted(counts)))
        mean = x.mean(axis=0)
    return CoefficientDataset(x, mean, layout)


def write_matrix(path, a: np.ndarray, labels: Sequence[str] | None = None) -> None:
    a = np.atleast_2d(a)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if labels is not None:
            w.writerow([""] + list(labels))
        for k, row in enumerate(a):
            cells = [fmt(x) for x in row]
            w.writerow(([labels[k]] if labels is not None else []) + cells)


def read_matrix(path, labeled: bool = True) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if labeled:
        rows = [r[1:] for r in rows[1:]]
    return np.array([[float(x) for x in r] for r in rows])


def write_table(path, columns: dict[str, Sequence]) -> None:
    names = list(columns)
    n = len(next(iter(columns.values()))) if columns else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for k in range(n):
            w.writerow([_cell(columns[c][k]) for c in names])


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    return str(v)


# traces


def write_trace(path, trace: ChainTrace) -> None:
    """JSON lines: {"sweep", "edges" (1-based pairs), "log_post", "accepted"}."""
    with open(path, "w") as fh:
        for s, g, lp, acc in zip(trace.sweeps, trace.graphs, trace.log_posts, trace.accepts):
            rec = {"sweep": s, "edges": [[i + 1, j + 1] for i, j in g.edges], "log_post": float(lp), "accepted": bool(acc)}
            fh.write(json.dumps(rec) + "\n")


def read_trace(path, p: int) -> ChainTrace:
    trace = ChainTrace(p)
    cache: dict[tuple, DecomposableGraph] = {}
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            key = tuple(tuple(e) for e in rec["edges"])
            g = cache.get(key)
            if g is None:
                adj = [0] * p
                for i, j in key:
                    adj[i - 1] |= 1 << (j - 1)
                    adj[j - 1] |= 1 << (i - 1)
                g = cache[key] = DecomposableGraph(p, tuple(adj), check=False)
            trace.sweeps.append(int(rec["sweep"]))
            trace.graphs.append(g)
            trace.log_posts.append(float(rec["log_post"]))
            trace.accepts.append(bool(rec["accepted"]))
    return trace


# node metadata


def read_metadata(path) -> NodeMetadata:
    """CSV with columns node_id, region, mirror_id (mirror_id may be blank)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or not {"node_id", "region"} <= set(rows[0]):
        raise BadConfigError(f"{path}: need node_id and region columns")
    rows.sort(key=lambda r: int(r["node_id"]))
    if [int(r["node_id"]) for r in rows] != list(range(1, len(rows) + 1)):
        raise BadConfigError(f"{path}: node ids must be 1..p")
    regions = tuple(r["region"] for r in rows)
    mirror = tuple(int(r["mirror_id"]) - 1 if r.get("mirror_id", "").strip() else -1 for r in rows)
    return NodeMetadata(regions, mirror)


def write_metadata(path, meta: NodeMetadata) -> None:
    write_table(
        path,
        {
            "node_id": list(range(1, meta.p + 1)),
            "region": list(meta.regions),
            "mirror_id": [str(m + 1) if m >= 0 else "" for m in meta.mirror],
        },
    )


# configuration


def parse_config(path) -> dict[str, Any]:
    """JSON object, or flat ``key = value`` lines (values parsed as JSON when possible)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            out = json.loads(text)
        except json.JSONDecodeError as exc:
            raise BadConfigError(f"{path}: {exc}") from None
        if not isinstance(out, dict):
            raise BadConfigError(f"{path}: top level must be an object")
        return out
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadConfigError(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        try:
            out[key] = json.loads(val)
        except json.JSONDecodeError:
            out[key] = val
    return out


def check_keys(cfg: dict, allowed: Iterable[str], where: str) -> None:
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise BadConfigError(f"{where}: unknown keys {unknown}")


def dataclass_config(cls, cfg: dict, where: str, exclude: Iterable[str] = ()):
    names = [f.name for f in fields(cls) if f.init and f.name not in set(exclude)]
    check_keys(cfg, names, where)
    conv = {k: tuple(tuple(x) if isinstance(x, list) else x for x in v) if isinstance(v, list) else v for k, v in cfg.items()}
    try:
        return cls(**conv)
    except (TypeError, ValueError) as exc:
        raise BadConfigError(f"{where}: {exc}") from None


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
