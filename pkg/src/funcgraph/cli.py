"""Batch command line: ``simulate``, ``fit``, ``summarize`` and ``compare``.

Every command writes into its own output directory, which always holds one
``manifest.json``.  Timestamps and wall time live only in the manifest, so
re-running with the same inputs and seed reproduces every other file byte
for byte.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import io
from .errors import AllZeroError, BadConfigError, DomainError, FuncGraphError, NotSPDError
from .pipeline import BASES, MODES, FitConfig, fit_coefficients, fit_functional
from .simulate import SimSpec, gen_smooth_dataset, sim_preset
from .summaries import (
    accuracy_stats,
    compare_groups,
    inclusion_probs,
    posterior_mode,
    region_asymmetry_stats,
    threshold_graph,
)

log = logging.getLogger("funcgraph")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
MANIFEST = "manifest.json"
FUNCTIONAL = "functional.csv"
COEFFICIENTS = "coefficients.csv"


def _version() -> str:
    try:
        return version("funcgraph")
    except PackageNotFoundError:
        return "unknown"


def _write_manifest(out: Path, command: str, config: dict, seed, inputs, outputs, started: float, **extra) -> None:
    record = {
        "command": command,
        "config": config,
        "seed": seed,
        "inputs": [str(p) for p in inputs],
        "outputs": sorted(outputs),
        "wall_time_s": round(time.perf_counter() - started, 3),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "version": _version(),
        "numpy": np.__version__,
        **extra,
    }
    io.write_json(out / MANIFEST, record)


def _read_manifest(directory: Path) -> dict:
    path = directory / MANIFEST
    if not path.exists():
        raise BadConfigError(f"{directory} has no {MANIFEST}")
    return json.loads(path.read_text())


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# simulate


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    cfg = io.parse_config(args.config) if args.config else {}
    preset = args.preset or cfg.pop("preset", "sim1")
    cfg.pop("preset", None)
    if args.seed is not None:
        cfg["seed"] = args.seed
    io.check_keys(cfg, [f for f in SimSpec.__dataclass_fields__ if f != "true_graph"], "simulate config")
    try:
        spec = sim_preset(preset, **{k: tuple(v) if isinstance(v, list) else v for k, v in cfg.items()})
    except TypeError as exc:
        raise BadConfigError(f"simulate config: {exc}") from None
    out = _outdir(args.out)
    data, truth = gen_smooth_dataset(spec)
    io.write_functional_csv(out / FUNCTIONAL, data)
    io.write_graph(out / "truth.graph", truth.graph)
    io.write_json(
        out / "truth.json",
        {"truncations": list(truth.layout.truncations), "eigenvalues": [e.tolist() for e in truth.eigenvalues]},
    )
    outputs = [FUNCTIONAL, "truth.graph", "truth.json"]
    if truth.noise_variances is not None:
        io.write_matrix(out / "noise_variances.csv", truth.noise_variances, None)
        outputs.append("noise_variances.csv")
    spec_dict = {k: v for k, v in asdict(spec).items() if k != "true_graph"}
    _write_manifest(out, "simulate", {"preset": preset, **spec_dict}, spec.seed, [], outputs, started, p=spec.p)
    log.info("wrote %s (p=%d, n=%d)", out, spec.p, spec.n)
    return EXIT_OK


# fit


def _fit_config(args) -> FitConfig:
    cfg = io.parse_config(args.config) if args.config else {}
    flags = {
        "seed": args.seed,
        "chains": args.chains,
        "iters": args.iters,
        "burnin": args.burnin,
        "q": args.q,
        "delta": args.delta,
        "fve": args.fve,
        "mode": args.mode,
        "basis": args.basis,
        "init": args.init,
    }
    cfg.update({k: v for k, v in flags.items() if v is not None})
    return io.dataclass_config(FitConfig, cfg, "fit config")


def cmd_fit(args) -> int:
    started = time.perf_counter()
    config = _fit_config(args)
    data_dir = Path(args.data_dir)
    out = _outdir(args.out)
    if config.basis == "scores":
        coefs = io.read_dataset(data_dir / COEFFICIENTS)
        result = fit_coefficients(coefs, config)
        inputs = [data_dir / COEFFICIENTS]
    else:
        data = io.read_functional_csv(data_dir / FUNCTIONAL)
        result = fit_functional(data, config)
        inputs = [data_dir / FUNCTIONAL]
    p = result.coefficients.layout.p
    io.write_dataset(out / COEFFICIENTS, result.coefficients, {"basis": config.basis, "mode": config.mode})
    io.write_matrix(out / "prior_scale_diag.csv", np.diag(result.params.scale)[None, :], None)
    outputs = [COEFFICIENTS, COEFFICIENTS + ".json", "prior_scale_diag.csv"]
    if result.noise is not None:
        io.write_table(
            out / "noise.csv",
            {"node_id": list(range(1, p + 1)), "sigma2": result.noise.sigma2, "coef_var": result.noise.coef_var},
        )
        outputs.append("noise.csv")
    chain_files = []
    for k, trace in enumerate(result.traces):
        name = f"trace_{k + 1}.jsonl"
        io.write_trace(out / name, trace)
        chain_files.append(name)
    _write_manifest(
        out,
        "fit",
        asdict(result.config),
        result.config.seed,
        inputs,
        outputs + chain_files,
        started,
        p=p,
        traces=chain_files,
        acceptance=[t.acceptance_rate for t in result.traces],
    )
    log.info("fit %d chain(s), acceptance %s", len(result.traces), [round(t.acceptance_rate, 3) for t in result.traces])
    return EXIT_OK


def _load_traces(trace_dir: Path):
    manifest = _read_manifest(trace_dir)
    if manifest.get("command") != "fit":
        raise BadConfigError(f"{trace_dir} is not a fit output directory")
    p = int(manifest["p"])
    return p, [io.read_trace(trace_dir / name, p) for name in manifest["traces"]]


# summarize


def cmd_summarize(args) -> int:
    started = time.perf_counter()
    if not 0 <= args.tau <= 1:
        raise BadConfigError(f"tau must be in [0, 1], got {args.tau}")
    trace_dir = Path(args.trace_dir)
    p, traces = _load_traces(trace_dir)
    out = _outdir(args.out)
    labels = [str(v) for v in range(1, p + 1)]
    probs = inclusion_probs(traces)
    io.write_matrix(out / "inclusion.csv", probs, labels)
    edges = threshold_graph(probs, args.tau)
    io.write_dot(out / "graph.dot", p, edges, probs)
    io.write_graph(out / "threshold.graph", (p, edges))
    io.write_graph(out / "mode.graph", posterior_mode(traces))
    outputs = ["inclusion.csv", "graph.dot", "threshold.graph", "mode.graph", "logpost.csv"]
    rows = {"chain": [], "sweep": [], "log_post": [], "accepted": [], "n_edges": []}
    for k, t in enumerate(traces):
        rows["chain"] += [k + 1] * len(t)
        rows["sweep"] += t.sweeps
        rows["log_post"] += t.log_posts
        rows["accepted"] += t.accepts
        rows["n_edges"] += [g.n_edges for g in t.graphs]
    io.write_table(out / "logpost.csv", rows)
    inputs = [trace_dir]
    if args.truth:
        truth = io.read_graph(args.truth)
        table = {"chain": [], "MisR": [], "Sen": [], "Spec": [], "nEdge": []}
        for label, tr in [(str(k + 1), [t]) for k, t in enumerate(traces)] + [("pooled", traces)]:
            row = accuracy_stats(tr, truth).as_row()
            table["chain"].append(label)
            for key, val in row.items():
                table[key].append(val)
        io.write_table(out / "accuracy.csv", table)
        outputs.append("accuracy.csv")
        inputs.append(args.truth)
    if args.metadata:
        meta = io.read_metadata(args.metadata)
        stats = region_asymmetry_stats(traces, meta)
        cols = stats.columns()
        io.write_table(out / "regions.csv", {"draw": list(range(1, len(stats.total_edges) + 1)), **cols})
        outputs.append("regions.csv")
        inputs.append(args.metadata)
    _write_manifest(out, "summarize", {"tau": args.tau}, None, inputs, outputs, started, p=p)
    return EXIT_OK


# compare


def cmd_compare(args) -> int:
    started = time.perf_counter()
    meta = io.read_metadata(args.metadata)
    dir_a, dir_b = Path(args.trace_dir_a), Path(args.trace_dir_b)
    _, traces_a = _load_traces(dir_a)
    _, traces_b = _load_traces(dir_b)
    cols_a = region_asymmetry_stats(traces_a, meta).columns()
    cols_b = region_asymmetry_stats(traces_b, meta).columns()
    table = {"statistic": [], "mean_a": [], "mean_b": [], "P_greater": [], "P_equal": [], "P_less": []}
    for name in cols_a:
        cmp = compare_groups(cols_a[name], cols_b[name])
        table["statistic"].append(name)
        table["mean_a"].append(float(np.mean(cols_a[name])))
        table["mean_b"].append(float(np.mean(cols_b[name])))
        table["P_greater"].append(cmp.greater)
        table["P_equal"].append(cmp.equal)
        table["P_less"].append(cmp.less)
    out = _outdir(args.out)
    io.write_table(out / "compare.csv", table)
    _write_manifest(out, "compare", {}, None, [dir_a, dir_b, args.metadata], ["compare.csv"], started)
    return EXIT_OK


# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="funcgraph", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic functional dataset")
    sim.add_argument("--preset", choices=["sim1", "sim2", "sim3"], help="default sim1")
    sim.add_argument("--config", help="key=value or JSON file of simulation settings")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="sample graphs from the posterior")
    fit.add_argument("data_dir")
    fit.add_argument("--out", required=True)
    fit.add_argument("--config", help="key=value or JSON file of fit settings")
    fit.add_argument("--seed", type=int)
    fit.add_argument("--chains", type=int)
    fit.add_argument("--iters", type=int, help="retained sweeps per chain")
    fit.add_argument("--burnin", type=int)
    fit.add_argument("--q", type=float, help="probability of a global move")
    fit.add_argument("--delta", type=float)
    fit.add_argument("--fve", type=float)
    fit.add_argument("--mode", choices=MODES)
    fit.add_argument("--basis", choices=BASES)
    fit.add_argument("--init", choices=["empty", "complete"])
    fit.set_defaults(func=cmd_fit)

    summ = sub.add_parser("summarize", help="posterior summaries of a fit")
    summ.add_argument("trace_dir")
    summ.add_argument("--out", required=True)
    summ.add_argument("--truth", help="graph file of the generating graph")
    summ.add_argument("--metadata", help="node metadata CSV")
    summ.add_argument("--tau", type=float, default=0.5)
    summ.set_defaults(func=cmd_summarize)

    cmp = sub.add_parser("compare", help="compare region statistics of two fits")
    cmp.add_argument("trace_dir_a")
    cmp.add_argument("trace_dir_b")
    cmp.add_argument("--metadata", required=True)
    cmp.add_argument("--out", required=True)
    cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (NotSPDError, DomainError, AllZeroError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FuncGraphError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
