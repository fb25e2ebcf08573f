import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from funcgraph import io
from funcgraph.basis import FunctionalDataset
from funcgraph.errors import BadConfigError, DimensionMismatchError, NonChordalError
from funcgraph.graph import DecomposableGraph
from funcgraph.hiw import BlockLayout
from funcgraph.likelihood import CoefficientDataset
from funcgraph.pipeline import FitConfig
from funcgraph.sampler import ChainTrace
from funcgraph.summaries import NodeMetadata


def test_graph_format(tmp_path):
    g = DecomposableGraph.from_edges(4, [(0, 1), (1, 2)])
    io.write_graph(tmp_path / "g", g)
    assert (tmp_path / "g").read_text() == "4\n1 2\n2 3\n"
    assert io.read_graph(tmp_path / "g") == g


def test_graph_format_errors(tmp_path):
    (tmp_path / "bad").write_text("4 4\n1 2\n")
    with pytest.raises(BadConfigError):
        io.read_graph(tmp_path / "bad")
    (tmp_path / "cycle").write_text("4\n1 2\n2 3\n3 4\n1 4\n")
    with pytest.raises(NonChordalError):
        io.read_graph(tmp_path / "cycle")
    assert io.read_edge_list(tmp_path / "cycle")[1] == [(0, 1), (1, 2), (2, 3), (0, 3)]


def test_dot_export(tmp_path):
    probs = np.zeros((3, 3))
    probs[0, 2] = probs[2, 0] = 0.25
    io.write_dot(tmp_path / "g.dot", 3, [(0, 2)], probs)
    text = (tmp_path / "g.dot").read_text()
    assert text.startswith("graph G {") and '1 -- 3 [label="0.250"];' in text


def test_functional_csv_round_trip(tmp_path, rng):
    grids = [np.linspace(0, 1, 5), np.linspace(0, 2, 7)]
    data = FunctionalDataset(grids, [rng.standard_normal((3, 5)), rng.standard_normal((3, 7))])
    io.write_functional_csv(tmp_path / "f.csv", data)
    back = io.read_functional_csv(tmp_path / "f.csv")
    assert all(np.array_equal(a, b) for a, b in zip(back.grids, data.grids))
    assert all(np.array_equal(a, b) for a, b in zip(back.values, data.values))


def test_functional_csv_errors(tmp_path):
    (tmp_path / "a.csv").write_text("sample_id,node_id,t\n1,1,0.0\n")
    with pytest.raises(BadConfigError):
        io.read_functional_csv(tmp_path / "a.csv")
    rows = ["sample_id,node_id,t,value"]
    rows += [f"1,1,{t},0.0" for t in range(5)] + [f"2,1,{t},0.0" for t in range(4)]
    (tmp_path / "b.csv").write_text("\n".join(rows) + "\n")
    with pytest.raises(DimensionMismatchError):
        io.read_functional_csv(tmp_path / "b.csv")


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=6, max_size=6))
def test_float_formatting_is_lossless(xs):
    assert [float(io.fmt(x)) for x in xs] == [float(x) for x in xs]


def test_dataset_round_trip(tmp_path, rng):
    layout = BlockLayout((2, 1, 3))
    data = CoefficientDataset(rng.standard_normal((4, 6)), rng.standard_normal(6), layout)
    io.write_dataset(tmp_path / "c.csv", data, {"source": "test"})
    back = io.read_dataset(tmp_path / "c.csv")
    assert back.layout.truncations == (2, 1, 3)
    assert np.array_equal(back.samples, data.samples) and np.array_equal(back.mean, data.mean)
    side = json.loads((tmp_path / "c.csv.json").read_text())
    assert side["provenance"] == {"source": "test"}
    # without the sidecar the layout comes from the column names
    (tmp_path / "c.csv.json").unlink()
    assert io.read_dataset(tmp_path / "c.csv").layout.truncations == (2, 1, 3)


def test_matrix_round_trip(tmp_path, rng):
    a = rng.standard_normal((3, 3))
    io.write_matrix(tmp_path / "m.csv", a, ["x", "y", "z"])
    assert np.array_equal(io.read_matrix(tmp_path / "m.csv"), a)
    io.write_matrix(tmp_path / "n.csv", a)
    assert np.array_equal(io.read_matrix(tmp_path / "n.csv", labeled=False), a)


def test_trace_round_trip(tmp_path):
    t = ChainTrace(3)
    for k, edges in enumerate([[], [(0, 1)], [(0, 1), (1, 2)]]):
        t.sweeps.append(k + 10)
        t.graphs.append(DecomposableGraph.from_edges(3, edges))
        t.log_posts.append(-1.5 * k)
        t.accepts.append(k % 2 == 1)
    io.write_trace(tmp_path / "t.jsonl", t)
    first = json.loads((tmp_path / "t.jsonl").read_text().splitlines()[2])
    assert first == {"sweep": 12, "edges": [[1, 2], [2, 3]], "log_post": -3.0, "accepted": False}
    back = io.read_trace(tmp_path / "t.jsonl", 3)
    assert back.graphs == t.graphs and back.sweeps == t.sweeps
    assert back.log_posts == t.log_posts and back.accepts == t.accepts


def test_metadata_round_trip(tmp_path):
    meta = NodeMetadata(("F", "F", "O"), (1, 0, -1))
    io.write_metadata(tmp_path / "meta.csv", meta)
    assert io.read_metadata(tmp_path / "meta.csv") == meta
    (tmp_path / "bad.csv").write_text("node,region\n1,F\n")
    with pytest.raises(BadConfigError):
        io.read_metadata(tmp_path / "bad.csv")


def test_key_value_config(tmp_path):
    (tmp_path / "c.txt").write_text("# fit\nfve = 0.8\nmode = noisy  # inline\niters=100\n")
    cfg = io.parse_config(tmp_path / "c.txt")
    assert cfg == {"fve": 0.8, "mode": "noisy", "iters": 100}
    fit = io.dataclass_config(FitConfig, cfg, "fit")
    assert fit.fve == 0.8 and fit.mode == "noisy"


def test_json_config_and_unknown_keys(tmp_path):
    (tmp_path / "c.json").write_text('{"q": 0.2, "colour": "red"}')
    with pytest.raises(BadConfigError, match="colour"):
        io.dataclass_config(FitConfig, io.parse_config(tmp_path / "c.json"), "fit")
    (tmp_path / "bad.txt").write_text("just words\n")
    with pytest.raises(BadConfigError):
        io.parse_config(tmp_path / "bad.txt")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(BadConfigError):
        io.parse_config(tmp_path / "bad.json")


def test_invalid_config_value():
    with pytest.raises(BadConfigError):
        io.dataclass_config(FitConfig, {"mode": "psychic"}, "fit")
