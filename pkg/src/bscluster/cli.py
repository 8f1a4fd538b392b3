"""Benchmark command line: scenario generation, solves, and experiment sweeps.

Subcommands
-----------
generate    draw a network and write it as JSON
solve       run the branch-and-bound solver, print a JSON run summary
trace       like solve, but write the per-iteration convergence CSV
sweep-size  iterations/nodes vs cell count, CSV with per-seed rows and means
sweep-snr   sum throughput vs SNR for bnb/heuristic/singletons, CSV

All sweeps derive realization seeds as ``base_seed + index`` and write rows
in a fixed order, so outputs are byte-deterministic for a given invocation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace

import numpy as np

from .bnb import SolverConfig, TraceRecord, solve
from .heuristic import baseline_partition, heuristic_cluster
from .network import NetworkConfig, calibrate_powers, generate_network, load_network, save_network
from .partition import bell_number, partition_to_rgs
from .throughput import MODEL_TAGS, OBJECTIVE_TAGS, Objective, ThroughputModel, evaluate_partition


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bscluster",
        description="Base-station clustering benchmarks: optimal solver, heuristic, sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", metavar="PATH", help="JSON file overriding scenario defaults")
        p.add_argument("--base-seed", type=int, default=1, help="seed of the first realization")

    def add_solver(p):
        p.add_argument("--model", choices=MODEL_TAGS, default="composite")
        p.add_argument("--objective", choices=OBJECTIVE_TAGS, default="wsr")
        p.add_argument("--epsilon", type=float, default=0.0)

    gen = sub.add_parser("generate", help="draw a network and write it as JSON")
    add_config(gen)
    gen.add_argument("--out", required=True, metavar="PATH")

    slv = sub.add_parser("solve", help="solve one realization, emit a JSON summary")
    add_config(slv)
    add_solver(slv)
    slv.add_argument("--network", metavar="PATH", help="saved network (overrides --config)")
    slv.add_argument("--out", metavar="PATH", help="summary destination (default: stdout)")

    trc = sub.add_parser("trace", help="solve one realization, write the convergence CSV")
    add_config(trc)
    add_solver(trc)
    trc.add_argument("--network", metavar="PATH")
    trc.add_argument("--trace", required=True, metavar="PATH", help="CSV destination")

    szs = sub.add_parser("sweep-size", help="solver complexity vs cell count")
    add_config(szs)
    add_solver(szs)
    szs.add_argument("--i-list", required=True, help="comma-separated cell counts, e.g. 4,6,8")
    szs.add_argument("--seeds", type=int, default=1, help="realizations per cell count")
    szs.add_argument("--out", required=True, metavar="PATH")

    snr = sub.add_parser("sweep-snr", help="sum throughput vs SNR per method")
    add_config(snr)
    add_solver(snr)
    snr.add_argument("--snr-list", required=True, help="comma-separated SNRs in dB, e.g. 0,10,20")
    snr.add_argument("--seeds", type=int, default=1, help="realizations per SNR point")
    snr.add_argument("--out", required=True, metavar="PATH")

    return parser


def _load_config(path: str | None) -> NetworkConfig:
    if path is None:
        return NetworkConfig()
    with open(path, "r", encoding="utf-8") as handle:
        overrides = json.load(handle)
    if not isinstance(overrides, dict):
        raise ValueError(f"{path}: config file must hold a JSON object")
    return NetworkConfig(**overrides)


def _get_network(args) -> "tuple":
    if getattr(args, "network", None):
        network = load_network(args.network)
    else:
        network = generate_network(_load_config(args.config), args.base_seed)
    model = ThroughputModel.from_config(args.model, network.config)
    objective = Objective.uniform(args.objective, network.num_ms)
    return network, model, objective


def _solve_with_heuristic(network, model, objective, epsilon, trace_callback=None):
    incumbent = partition_to_rgs(heuristic_cluster(network))
    return solve(
        network,
        model,
        objective,
        SolverConfig(epsilon=epsilon),
        initial_incumbent=incumbent,
        trace_callback=trace_callback,
    )


def run_generate(args) -> int:
    network = generate_network(_load_config(args.config), args.base_seed)
    save_network(network, args.out)
    return 0


def run_solve(args) -> int:
    network, model, objective, = _get_network(args)
    solution = _solve_with_heuristic(network, model, objective, args.epsilon)
    stats = solution.stats
    summary = {
        "seed": network.seed,
        "model": args.model,
        "objective": args.objective,
        "epsilon": args.epsilon,
        "rgs": str(solution.rgs),
        "clusters": [list(c) for c in solution.partition.clusters],
        "objective_value": solution.objective_value,
        "per_ms_throughput": solution.per_ms_throughput.tolist(),
        "gap": solution.gap,
        "iterations": stats.iterations,
        "nodes_bounded": stats.nodes_bounded,
        "nodes_pruned": stats.nodes_pruned,
        "fraction_pruned": stats.fraction_pruned,
    }
    text = json.dumps(summary, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        print(text)
    return 0


def run_trace(args) -> int:
    network, model, objective = _get_network(args)
    records: list[TraceRecord] = []
    solution = _solve_with_heuristic(
        network, model, objective, args.epsilon, trace_callback=records.append
    )
    stats = solution.stats
    with open(args.trace, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["iteration", "best_upper_bound", "incumbent_value", "nodes_pruned", "fraction_pruned"]
        )
        for rec in records:
            writer.writerow(
                [rec.iteration, rec.best_bound, rec.incumbent_value, rec.nodes_pruned,
                 rec.fraction_pruned]
            )
        writer.writerow(
            ["total", records[-1].best_bound if records else "",
             solution.objective_value, stats.nodes_pruned, stats.fraction_pruned]
        )
    return 0


def _parse_list(text: str, kind) -> list:
    return [kind(part) for part in text.split(",") if part.strip()]


def run_sweep_size(args) -> int:
    cell_counts = _parse_list(args.i_list, int)
    base_config = _load_config(args.config)
    rows = []
    failures = []
    for num_cells in cell_counts:
        per_count = []
        for index in range(args.seeds):
            seed = args.base_seed + index
            try:
                config = replace(base_config, num_cells=num_cells)
                network = generate_network(config, seed)
                model = ThroughputModel.from_config(args.model, config)
                objective = Objective.uniform(args.objective, network.num_ms)
                solution = _solve_with_heuristic(network, model, objective, args.epsilon)
            except Exception as exc:  # record and continue with the sweep
                failures.append(f"I={num_cells} seed={seed}: {exc}")
                continue
            stats = solution.stats
            per_count.append((stats.iterations, stats.nodes_bounded))
            rows.append(
                [num_cells, seed, stats.iterations, stats.nodes_bounded, bell_number(num_cells)]
            )
        if per_count:
            iters = [p[0] for p in per_count]
            bounded = [p[1] for p in per_count]
            rows.append(
                [num_cells, "mean", sum(iters) / len(iters), sum(bounded) / len(bounded),
                 bell_number(num_cells)]
            )
    with open(args.out, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["num_cells", "seed", "iterations", "nodes_bounded", "bell_number"])
        writer.writerows(rows)
    for line in failures:
        print(line, file=sys.stderr)
    return 1 if failures else 0


def run_sweep_snr(args) -> int:
    snrs = _parse_list(args.snr_list, float)
    base_config = _load_config(args.config)
    rows = []
    failures = []
    for snr_db in snrs:
        sums = {"bnb": [], "heuristic": [], "singletons": []}
        for index in range(args.seeds):
            seed = args.base_seed + index
            try:
                drop = generate_network(base_config, seed)
                network = calibrate_powers(drop, snr_db)
                model = ThroughputModel.from_config(args.model, network.config)
                objective = Objective.uniform(args.objective, network.num_ms)

                solution = _solve_with_heuristic(network, model, objective, args.epsilon)
                values = {"bnb": solution.objective_value}
                values["heuristic"], _ = evaluate_partition(
                    model, objective, network, heuristic_cluster(network)
                )
                values["singletons"], _ = evaluate_partition(
                    model, objective, network,
                    baseline_partition("singletons", network.num_cells),
                )
            except Exception as exc:
                failures.append(f"snr={snr_db} seed={seed}: {exc}")
                continue
            for method in ("bnb", "heuristic", "singletons"):
                sums[method].append(values[method])
                rows.append([snr_db, seed, method, values[method]])
        for method in ("bnb", "heuristic", "singletons"):
            if sums[method]:
                rows.append([snr_db, "mean", method, float(np.mean(sums[method]))])
    with open(args.out, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["snr_db", "seed", "method", "sum_throughput"])
        writer.writerows(rows)
    for line in failures:
        print(line, file=sys.stderr)
    return 1 if failures else 0


_COMMANDS = {
    "generate": run_generate,
    "solve": run_solve,
    "trace": run_trace,
    "sweep-size": run_sweep_size,
    "sweep-snr": run_sweep_snr,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:
        print(f"bscluster {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
