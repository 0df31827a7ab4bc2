"""JSON documents for graphs, unitaries, schedules and qubit networks.

All writers stamp a schema_version; loaders accept documents with or
without the stamp and raise InputFormatError with a usable message on
anything malformed.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .bounds import QubitNetworkSpec
from .decoupling import isolate_edge
from .graphs import HamiltonianGraph
from .synthesis import (
    ELIMINATION_ORDER,
    TROTTER_ORDER,
    DiagonalPulse,
    EdgeEvolution,
    PulseSchedule,
)

SCHEMA_VERSION = 1


class InputFormatError(ValueError):
    """Malformed JSON input (bad syntax, missing keys, wrong shapes)."""


def load_json(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputFormatError(f"input file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"invalid JSON in {path}: {exc}") from exc


def dump_json(doc, path: str | Path):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


# -- graphs -------------------------------------------------------------------


def graph_to_doc(graph: HamiltonianGraph) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "dim": graph.dim,
        "edges": [
            {"n": n, "m": m, "re": g.real, "im": g.imag} for n, m, g in graph.edges
        ],
    }


def graph_from_doc(doc: dict) -> HamiltonianGraph:
    try:
        dim = int(doc["dim"])
        edges = [
            (int(e["n"]), int(e["m"]), complex(float(e["re"]), float(e.get("im", 0.0))))
            for e in doc["edges"]
        ]
        return HamiltonianGraph.from_edges(dim, edges)
    except InputFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"malformed graph document: {exc}") from exc


# -- unitaries ----------------------------------------------------------------


def unitary_to_doc(u: np.ndarray) -> dict:
    u = np.asarray(u, dtype=complex)
    return {
        "schema_version": SCHEMA_VERSION,
        "dim": u.shape[0],
        "re": u.real.tolist(),
        "im": u.imag.tolist(),
    }


def unitary_from_doc(doc: dict) -> np.ndarray:
    try:
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc["im"], dtype=float)
        u = re + 1j * im
        d = int(doc.get("dim", u.shape[0]))
        if u.shape != (d, d):
            raise InputFormatError(
                f"matrix shape {u.shape} does not match dim {d}"
            )
        return u
    except InputFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"malformed unitary document: {exc}") from exc


# -- schedules ----------------------------------------------------------------


def schedule_to_doc(schedule: PulseSchedule) -> dict:
    steps = []
    for s in schedule.steps:
        if isinstance(s, DiagonalPulse):
            steps.append({"type": "diag", "phases": list(s.phases)})
        else:
            steps.append(
                {
                    "type": "edge",
                    "n": s.edge[0],
                    "m": s.edge[1],
                    "alpha": s.alpha,
                    "duration": s.duration,
                }
            )
    return {
        "schema_version": SCHEMA_VERSION,
        "dim": schedule.graph.dim,
        "total_time": schedule.total_time,
        "compiler": {
            "elimination_order": ELIMINATION_ORDER,
            "trotter_order": TROTTER_ORDER,
        },
        "steps": steps,
    }


def schedule_from_doc(doc: dict, graph: HamiltonianGraph) -> PulseSchedule:
    """Rebuild a schedule against its system graph; each edge step's
    decoupling map is reconstructed by isolating that edge."""
    try:
        if int(doc.get("dim", graph.dim)) != graph.dim:
            raise InputFormatError(
                f"schedule dim {doc.get('dim')} does not match graph dim {graph.dim}"
            )
        maps = {}
        steps: list = []
        for s in doc["steps"]:
            if s["type"] == "diag":
                steps.append(DiagonalPulse(phases=tuple(float(p) for p in s["phases"])))
            elif s["type"] == "edge":
                n, m = int(s["n"]), int(s["m"])
                if (n, m) not in maps:
                    maps[(n, m)], _, _ = isolate_edge(graph, (n, m))
                steps.append(
                    EdgeEvolution(
                        edge=(n, m),
                        alpha=float(s["alpha"]),
                        duration=float(s["duration"]),
                        decoupling_map=maps[(n, m)],
                    )
                )
            else:
                raise InputFormatError(f"unknown step type {s['type']!r}")
        return PulseSchedule(graph=graph, steps=tuple(steps))
    except InputFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"malformed schedule document: {exc}") from exc


# -- qubit networks -----------------------------------------------------------


def qubit_network_to_doc(spec: QubitNetworkSpec) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "n": spec.n,
        "couplings": [
            {
                "i": i,
                "j": j,
                "terms": [{"a": a, "b": b, "g": g} for (a, b), g in sorted(terms.items())],
            }
            for (i, j), terms in sorted(spec.couplings.items())
        ],
        "splittings": [
            {"i": i, "terms": [{"a": a, "w": w} for a, w in sorted(terms.items())]}
            for i, terms in sorted(spec.splittings.items())
        ],
    }


def qubit_network_from_doc(doc: dict) -> QubitNetworkSpec:
    try:
        couplings = {
            (int(c["i"]), int(c["j"])): {
                (t["a"], t["b"]): float(t["g"]) for t in c["terms"]
            }
            for c in doc["couplings"]
        }
        splittings = {
            int(s["i"]): {t["a"]: float(t["w"]) for t in s["terms"]}
            for s in doc.get("splittings", [])
        }
        return QubitNetworkSpec(n=int(doc["n"]), couplings=couplings, splittings=splittings)
    except InputFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"malformed qubit network document: {exc}") from exc
