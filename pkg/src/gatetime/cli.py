"""Command-line frontend: bound evaluation, graph tools, schedule
synthesis, simulation, decoupling checks, GRAPE optimization and the
figure pipelines.

stdout carries data (JSON), stderr carries diagnostics. Exit codes:
0 success, 2 malformed input, 3 infeasible request (disconnected graph),
4 search failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict, replace

import numpy as np

from . import bounds as bounds_mod
from . import experiments as exp_mod
from . import serialize
from .decoupling import apply_map, isolate_edge, trotter_sequence
from .graphs import (
    ControlSystem,
    DisconnectedGraphError,
    enumerate_connected_graphs,
    random_weights,
    tight_binding,
    to_matrix,
)
from .grape import GrapeConfig, SearchFailure, grape_optimize, minimum_time_scan, minimum_time_search
from .linalg import gate_error, hs_norm, mat_exp
from .serialize import InputFormatError
from .synthesis import brute_force_path_search, shortest_time_path, simulate, synthesize

log = logging.getLogger("gatetime")

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_BAD_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_SEARCH_FAILURE = 4


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("GATETIME_SEED")
    return int(env) if env else 0


def _meta(args, seed: int, config: GrapeConfig | None = None) -> dict:
    meta = {"seed": seed, "command": args.command}
    if config is not None:
        meta["config"] = asdict(config)
    return meta


def _emit(doc, path: str | None):
    if isinstance(doc, dict):
        doc.setdefault("schema_version", serialize.SCHEMA_VERSION)
    if path:
        serialize.dump_json(doc, path)
        print(json.dumps({"written": path}))
    else:
        print(json.dumps(doc, indent=2))


def _json_value(x: float):
    if math.isinf(x):
        return None
    return x


def _parse_params(text: str) -> dict:
    params = {}
    if not text:
        return params
    for item in text.split(","):
        if "=" not in item:
            raise InputFormatError(f"--params entries must be k=v, got {item!r}")
        key, value = item.split("=", 1)
        try:
            params[key.strip()] = float(value)
        except ValueError as exc:
            raise InputFormatError(f"non-numeric parameter {item!r}") from exc
    return params


def _load_graph(path: str):
    return serialize.graph_from_doc(serialize.load_json(path))


def _load_unitary(path: str):
    return serialize.unitary_from_doc(serialize.load_json(path))


# -- subcommand handlers -------------------------------------------------------


def _cmd_bounds(args) -> int:
    seed = _resolve_seed(args)
    if args.batch:
        requests = serialize.load_json(args.batch)
        if not isinstance(requests, list):
            raise InputFormatError("--batch expects a JSON array")
        reports = [
            bounds_mod.evaluate_formula(r["formula"], r.get("params", {})).to_doc()
            for r in requests
        ]
        _emit({"meta": _meta(args, seed), "reports": reports}, args.out)
        return EXIT_OK
    if args.formula == "variational_lower":
        if not (args.graph and args.target):
            raise InputFormatError(
                "variational_lower needs --graph and --target files"
            )
        graph = _load_graph(args.graph)
        target = _load_unitary(args.target)
        value = bounds_mod.variational_lower_bound(
            target, to_matrix(graph), starts=args.starts, seed=seed
        )
        doc = {
            "meta": _meta(args, seed),
            "formula_id": "variational_lower",
            "inputs": {"graph": args.graph, "target": args.target, "starts": args.starts},
            "value": _json_value(value),
            "unbounded": math.isinf(value),
        }
        _emit(doc, args.out)
        return EXIT_OK
    if not args.formula:
        raise InputFormatError("bounds needs --formula or --batch")
    report = bounds_mod.evaluate_formula(args.formula, _parse_params(args.params))
    doc = report.to_doc()
    doc["meta"] = _meta(args, seed)
    _emit(doc, args.out)
    return EXIT_OK


def _cmd_graphs(args) -> int:
    seed = _resolve_seed(args)
    if args.action == "enumerate":
        graphs = enumerate_connected_graphs(args.d)
        doc = {
            "meta": _meta(args, seed),
            "d": args.d,
            "count": len(graphs),
            "graphs": [serialize.graph_to_doc(g) for g in graphs],
        }
        _emit(doc, args.out)
    elif args.action == "tb":
        _emit(serialize.graph_to_doc(tight_binding(args.d)), args.out)
    elif args.action == "random-weights":
        if not args.graph:
            raise InputFormatError("random-weights needs --graph")
        graph = _load_graph(args.graph)
        out = random_weights(graph, args.low, args.high, seed=seed)
        doc = serialize.graph_to_doc(out)
        doc["meta"] = _meta(args, seed)
        _emit(doc, args.out)
    return EXIT_OK


def _cmd_synth(args) -> int:
    seed = _resolve_seed(args)
    graph = _load_graph(args.graph)
    target = _load_unitary(args.target)
    schedule = synthesize(graph, target)
    error = gate_error(simulate(schedule), target)
    summary = {
        "meta": _meta(args, seed),
        "total_time": schedule.total_time,
        "gate_error": error,
        "steps": len(schedule.steps),
    }
    if args.oracle:
        pairs = [
            (n, m)
            for n in range(1, graph.dim + 1)
            for m in range(n + 1, graph.dim + 1)
        ]
        max_dev = 0.0
        for n, m in pairs:
            for alpha in (math.pi / 2, math.pi / 4):
                _, fast = shortest_time_path(graph, n, m, alpha)
                _, slow = brute_force_path_search(graph, n, m, alpha)
                max_dev = max(max_dev, abs(fast - slow))
        summary["oracle"] = {"path_checks": 2 * len(pairs), "max_deviation": max_dev}
    if args.out:
        serialize.dump_json(serialize.schedule_to_doc(schedule), args.out)
        summary["written"] = args.out
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    graph = _load_graph(args.graph)
    schedule = serialize.schedule_from_doc(serialize.load_json(args.schedule), graph)
    u = simulate(schedule, trotter_n=args.trotter_n)
    doc = serialize.unitary_to_doc(u)
    doc["meta"] = _meta(args, seed)
    doc["total_time"] = schedule.total_time
    if args.target:
        doc["gate_error"] = gate_error(u, _load_unitary(args.target))
    _emit(doc, args.out)
    return EXIT_OK


def _cmd_decouple(args) -> int:
    seed = _resolve_seed(args)
    graph = _load_graph(args.graph)
    try:
        n, m = (int(x) for x in args.edge.split(","))
    except ValueError as exc:
        raise InputFormatError(f"--edge must be n,m with integers, got {args.edge!r}") from exc
    avg, effective, correction = isolate_edge(graph, (n, m))
    doc = {
        "meta": _meta(args, seed),
        "edge": [n, m],
        "map_size": avg.size,
        "effective_re": effective.matrix.real.tolist(),
        "effective_im": effective.matrix.imag.tolist(),
        "phase_correction": list(correction.thetas),
    }
    if args.trotter_n:
        # Compare the finite-n sequence against the exact averaged drift
        # (the raw isolated edge, before the phase conjugation).
        h0 = to_matrix(graph)
        raw = apply_map(avg, h0).matrix
        approx = trotter_sequence(avg, h0, args.time, args.trotter_n)
        doc["trotter_n"] = args.trotter_n
        doc["time"] = args.time
        doc["trotter_error_hs"] = hs_norm(approx - mat_exp(raw, args.time))
    _emit(doc, args.out)
    return EXIT_OK


def _grape_config_from_args(args, seed: int) -> GrapeConfig:
    return GrapeConfig(
        num_slices=args.slices,
        max_iters=args.max_iters,
        error_threshold=args.threshold,
        restarts=args.restarts,
        t_resolution=args.t_resolution,
        field_init_scale=args.field_init_scale,
        seed=seed,
    )


def _grape_result_doc(res) -> dict:
    return {
        "t": res.t,
        "final_error": res.final_error,
        "converged": res.converged,
        "iterations": res.iterations,
        "fields": res.fields.tolist(),
    }


def _cmd_grape(args) -> int:
    seed = _resolve_seed(args)
    graph = _load_graph(args.graph)
    target = _load_unitary(args.target)
    system = ControlSystem(graph)
    config = _grape_config_from_args(args, seed)
    doc = {"meta": _meta(args, seed, config)}
    if args.time is not None:
        res = grape_optimize(system, target, args.time, config)
        doc["result"] = _grape_result_doc(res)
    else:
        t_min, res = minimum_time_search(system, target, config)
        doc["t_min"] = t_min
        doc["result"] = _grape_result_doc(res)
        if args.oracle:
            lo = max(config.t_resolution, 0.5 * t_min)
            times = np.linspace(lo, 1.3 * t_min, 12)
            t_scan, trace = minimum_time_scan(system, target, times, config)
            doc["oracle"] = {
                "t_scan_min": _json_value(t_scan),
                "trace": [[t, e] for t, e in trace],
            }
    _emit(doc, args.out)
    return EXIT_OK


def _cmd_experiment(args) -> int:
    seed = _resolve_seed(args)
    d_range = list(range(args.d_min, args.d_max + 1))
    base = {
        "fig1": exp_mod.FIG1_CONFIG,
        "fig2": exp_mod.FIG2_CONFIG,
        "fig3": exp_mod.FIG3_CONFIG,
    }[args.figure]
    config = replace(base, seed=seed)
    log.info("running %s over d=%s with seed %d", args.figure, d_range, seed)
    if args.figure == "fig1":
        result = exp_mod.exp_fig1(d_range, config=config, jobs=args.jobs)
    elif args.figure == "fig2":
        result = exp_mod.exp_fig2(
            d_range, trials_per_graph=args.trials, config=config, jobs=args.jobs
        )
    else:
        result = exp_mod.exp_fig3(
            d_range,
            trials_per_graph=args.trials,
            config=config,
            jobs=args.jobs,
            allow_large=args.allow_large,
        )
    paths = exp_mod.write_result_csv(result, args.out)
    meta = _meta(args, seed, config)
    meta["figure"] = args.figure
    meta["d_range"] = d_range
    print(
        json.dumps(
            {
                "meta": meta,
                "rows": [list(r) for r in result.rows],
                "columns": list(result.row_columns),
                "violations": len(result.violations),
                "paths": paths,
            },
            indent=2,
        )
    )
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gatetime",
        description="Control schedules and minimum gate-time bounds for "
        "graph-coupled d-level systems",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="evaluate a closed-form or variational bound")
    p.add_argument("--formula")
    p.add_argument("--params", default="")
    p.add_argument("--batch", help="JSON array of {formula, params} requests")
    p.add_argument("--graph")
    p.add_argument("--target")
    p.add_argument("--starts", type=int, default=50)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("graphs", help="enumerate, build or reweight graphs")
    p.add_argument("action", choices=["enumerate", "tb", "random-weights"])
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--graph")
    p.add_argument("--low", type=float, default=1.0)
    p.add_argument("--high", type=float, default=2.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_graphs)

    p = sub.add_parser("synth", help="synthesize a schedule for a unitary target")
    p.add_argument("--graph", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out")
    p.add_argument("--oracle", action="store_true", help="brute-force path cross-check")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("simulate", help="simulate a schedule (ideal or finite-n)")
    p.add_argument("--graph", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--trotter-n", type=int, dest="trotter_n")
    p.add_argument("--target")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("decouple", help="isolate an edge; optional finite-n check")
    p.add_argument("--graph", required=True)
    p.add_argument("--edge", required=True, help="n,m")
    p.add_argument("--trotter-n", type=int, dest="trotter_n")
    p.add_argument("--time", type=float, default=1.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_decouple)

    p = sub.add_parser("grape", help="optimize fields at fixed T or search T_min")
    p.add_argument("--graph", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--time", type=float, help="fixed T; omit to search for T_min")
    p.add_argument("--slices", type=int, default=64)
    p.add_argument("--threshold", type=float, default=1e-4)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iters", type=int, default=2000, dest="max_iters")
    p.add_argument("--t-resolution", type=float, default=0.01, dest="t_resolution")
    p.add_argument("--field-init-scale", type=float, default=1.0, dest="field_init_scale")
    p.add_argument("--oracle", action="store_true", help="fine T-scan cross-check")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_grape)

    p = sub.add_parser("experiment", help="run a figure pipeline, write CSVs")
    p.add_argument("figure", choices=["fig1", "fig2", "fig3"])
    p.add_argument("--out", required=True)
    p.add_argument("--d-min", type=int, default=2, dest="d_min")
    p.add_argument("--d-max", type=int, default=4, dest="d_max")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--allow-large", action="store_true", dest="allow_large")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_experiment)
    return parser


def run(argv=None) -> int:
    """Dispatch a command line; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except SearchFailure as exc:
        _fail(EXIT_SEARCH_FAILURE, exc)
        return EXIT_SEARCH_FAILURE
    except DisconnectedGraphError as exc:
        _fail(EXIT_INFEASIBLE, exc)
        return EXIT_INFEASIBLE
    except (InputFormatError, ValueError) as exc:
        _fail(EXIT_BAD_INPUT, exc)
        return EXIT_BAD_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        _fail(EXIT_OTHER, exc)
        return EXIT_OTHER


def _fail(code: int, exc: Exception):
    doc = {"error": {"code": code, "type": type(exc).__name__, "message": str(exc)}}
    if isinstance(exc, SearchFailure) and exc.diagnostics:
        doc["error"]["diagnostics"] = {
            k: v for k, v in exc.diagnostics.items() if k != "attempts"
        }
    print(json.dumps(doc), file=sys.stderr)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
