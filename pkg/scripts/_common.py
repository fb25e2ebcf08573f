"""Shared replication loop for the simulation scripts."""

from __future__ import annotations

import argparse
import time

import numpy as np

from funcgraph.pipeline import FitConfig, fit_functional
from funcgraph.simulate import gen_smooth_dataset, sim_preset
from funcgraph.summaries import accuracy_stats, inclusion_probs, posterior_mode


def parse(description: str, seeds: int, **fit_defaults) -> tuple[argparse.Namespace, FitConfig]:
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--seeds", type=int, default=seeds, help="number of replicate datasets")
    ap.add_argument("--iters", type=int, default=fit_defaults.pop("iters", None))
    ap.add_argument("--burnin", type=int, default=fit_defaults.pop("burnin", None))
    args = ap.parse_args()
    return args, FitConfig(iters=args.iters, burnin=args.burnin, **fit_defaults)


def replicate(preset: str, args, config: FitConfig, tau: float | None = None) -> None:
    rows = []
    print(f"{'seed':>4} {'MisR':>7} {'Sen':>6} {'Spec':>6} {'nEdge':>6} {'mode=truth':>10} {'sec':>6}")
    for seed in range(args.seeds):
        t0 = time.perf_counter()
        data, truth = gen_smooth_dataset(sim_preset(preset, seed=seed))
        cfg = FitConfig(**{**config.__dict__, "seed": seed})
        result = fit_functional(data, cfg)
        acc = accuracy_stats(result.traces, truth.graph)
        hit = posterior_mode(result.traces) == truth.graph
        line = f"{seed:>4} {acc.mis_rate:7.4f} {acc.sensitivity:6.3f} {acc.specificity:6.3f} {acc.mean_edges:6.2f}"
        line += f" {str(hit):>10} {time.perf_counter() - t0:6.1f}"
        if tau is not None:
            probs = inclusion_probs(result.traces)
            iu = np.triu_indices(truth.graph.p, 1)
            kept = probs[iu] > tau
            true = truth.graph.adjacency_matrix()[iu]
            line += f"  edges>{tau}: {kept.sum()} ({(kept & true).sum()} true)"
        print(line, flush=True)
        rows.append((acc.mis_rate, acc.sensitivity, acc.specificity, acc.mean_edges))
    mean = np.mean(rows, axis=0)
    print(f"{'mean':>4} {mean[0]:7.4f} {mean[1]:6.3f} {mean[2]:6.3f} {mean[3]:6.2f}")
