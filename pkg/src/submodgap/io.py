"""JSON and CSV formats.  Every rational is written as a lowest-terms "p/q" string."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Any

from .errors import SchemaError
from .instances import (
    BipartiteInstance,
    DiamondInstance,
    HstInstance,
    Metric,
    WeightedGraph,
    build_diamond,
    build_hst,
    build_matching_universe,
    metric_closure,
)
from .rational import fmt, parse
from .setfn import SetFunction


def dumps(obj: Any) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def graph_to_json(g: WeightedGraph) -> dict:
    return {"n": g.vertex_count, "edges": [[u, v, fmt(w)] for u, v, w in g.edges]}


def graph_from_json(obj: dict) -> WeightedGraph:
    try:
        edges = tuple((int(u), int(v), parse(w)) for u, v, w in obj["edges"])
        return WeightedGraph(int(obj["n"]), edges)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad graph object: {exc}") from exc


def instance_to_json(inst) -> dict:
    if isinstance(inst, DiamondInstance):
        return {
            "type": "diamond",
            "params": {"k": inst.depth},
            "graph": graph_to_json(inst.graph),
            "annotations": {
                "level_of_vertex": list(inst.level_of_vertex),
                "side_of_vertex": list(inst.side_of_vertex),
                "source": inst.source,
                "root": inst.root,
            },
        }
    if isinstance(inst, HstInstance):
        return {
            "type": "hst",
            "params": {"d": inst.depth, "alpha": fmt(inst.alpha)},
            "graph": graph_to_json(inst.tree),
            "annotations": {
                "beta": fmt(inst.beta),
                "facility_cost": fmt(inst.facility_cost),
                "clients_of_vertex": list(inst.clients_of_vertex),
                "facilities": list(inst.facilities),
                "depth_of_vertex": list(inst.depth_of_vertex),
            },
        }
    if isinstance(inst, BipartiteInstance):
        # U is 0..u-1, V vertex i is u+i; every edge has unit length
        u = inst.u_size
        edges = [[a, u + i, "1/1"] for i, vs in enumerate(inst.v_vertices) for a in sorted(vs)]
        return {
            "type": "bipartite",
            "params": {"u_size": u},
            "graph": {"n": u + len(inst.v_vertices), "edges": edges},
            "annotations": {
                "v_vertices": [sorted(vs) for vs in inst.v_vertices],
                "requests": list(inst.requests),
            },
        }
    raise TypeError(f"cannot serialise {type(inst).__name__}")


def instance_from_json(obj: dict):
    """Rebuild an instance from its parameters and check the stored graph agrees."""
    try:
        kind, params = obj["type"], obj["params"]
        if kind == "diamond":
            inst = build_diamond(int(params["k"]))
            graph = inst.graph
        elif kind == "hst":
            inst = build_hst(int(params["d"]), parse(params["alpha"]))
            graph = inst.tree
        elif kind == "bipartite":
            inst = build_matching_universe(int(params["u_size"]))
            inst = inst.with_requests(int(r) for r in obj.get("annotations", {}).get("requests", []))
            graph = None
        else:
            raise SchemaError(f"unknown instance type {kind!r}")
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad instance object: {exc}") from exc
    if graph is not None and "graph" in obj:
        stored = graph_from_json(obj["graph"])
        if stored != graph:
            raise SchemaError(f"{kind} graph does not match its parameters")
    return inst


def metric_to_json(m: Metric) -> dict:
    return {"type": "metric", "dist": [[fmt(x) for x in row] for row in m.dist]}


def metric_from_json(obj: dict) -> Metric:
    """Accept an explicit distance matrix or any instance file (its shortest-path metric)."""
    if obj.get("type") == "metric":
        try:
            return Metric.from_matrix([[parse(x) for x in row] for row in obj["dist"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad metric object: {exc}") from exc
    if "graph" in obj:
        return metric_closure(graph_from_json(obj["graph"]))
    raise SchemaError("expected a metric or an instance with a graph")


def set_function_from_json(obj: dict) -> SetFunction:
    """Read a SetFunction, also from a gap record (its certificate g) or an frt record."""
    if not isinstance(obj, dict):
        raise SchemaError("expected a JSON object")
    if isinstance(obj.get("result"), dict):
        obj = obj["result"]
    for key in ("proxy", "g"):
        if isinstance(obj.get(key), dict):
            obj = obj[key]
            break
    try:
        return SetFunction.from_json(obj)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad set function: {exc}") from exc


def csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, Fraction) else ("" if x is None else x) for x in row])
    return buf.getvalue()
