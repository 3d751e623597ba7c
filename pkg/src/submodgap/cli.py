"""Command-line driver.

Exit codes: 0 success, 2 usage or input error, 3 size limit, 4 invariant
violation (including a failed ``check``).  Output is a pure function of the
arguments, so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .bounds import bound_rows, estimating_lower_bound, steiner_t_sequence, ufl_gap_bound
from .errors import InvariantViolation, PreconditionError, SchemaError, SizeLimitError
from .frt import check_frt_tree, distortion_rows, proxy_function
from .gap_lp import envelope_ratio, submodularity_gap
from .instances import (
    BipartiteInstance,
    DiamondInstance,
    HstInstance,
    build_diamond,
    build_hst,
    build_matching_universe,
    metric_closure,
)
from .io import (
    csv_text,
    dumps,
    instance_from_json,
    instance_to_json,
    metric_from_json,
    set_function_from_json,
)
from .rational import fmt, parse
from .setfn import is_submodular
from .solvers import (
    even_odd_free,
    matching_table,
    max_matching,
    rooted_steiner_table,
    steiner_cost_table,
    steiner_exact,
    ufl_cost_table,
    ufl_exact,
)


class UsageError(Exception):
    pass


def _int_list(text: str | None) -> list[int] | None:
    if text is None:
        return None
    text = text.strip()
    if not text:
        return []
    try:
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _alpha(args) -> Fraction:
    if args.alpha is None:
        raise UsageError("--alpha is required")
    try:
        return parse(args.alpha)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad --alpha {args.alpha!r}") from exc


def _need(args, name: str):
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--{name} is required")
    return value


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc.msg})") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _build_instance(args):
    """Instance from --file, or from --instance and its parameters."""
    if getattr(args, "file", None):
        return instance_from_json(_read_json(args.file))
    kind = _need(args, "instance")
    if kind == "diamond":
        return build_diamond(_need(args, "k"))
    if kind == "hst":
        return build_hst(_need(args, "d"), _alpha(args))
    inst = build_matching_universe(_need(args, "u"))
    return inst.with_requests(_int_list(args.requests) or [])


def _instance_id(inst) -> tuple[str, str, dict]:
    """(problem, instance id, parameters) for result records."""
    if isinstance(inst, DiamondInstance):
        return "steiner", f"diamond-k{inst.depth}", {"k": inst.depth}
    if isinstance(inst, HstInstance):
        a = fmt(inst.alpha)
        return "ufl", f"hst-d{inst.depth}-a{a}", {"d": inst.depth, "alpha": a}
    req = ",".join(map(str, inst.requests))
    return "matching", f"bipartite-u{inst.u_size}-r{req}", {"u_size": inst.u_size, "requests": list(inst.requests)}


def _config(args) -> dict:
    skip = {"func", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def _record(kind: str, args, **fields) -> dict:
    return {"kind": kind, "version": __version__, "config": _config(args), **fields}


# ---------------------------------------------------------------- subcommands


def cmd_gen(args) -> int:
    _emit(dumps(instance_to_json(_build_instance(args))), args.out)
    return 0


def cmd_solve(args) -> int:
    inst = _build_instance(args)
    problem, ident, params = _instance_id(inst)
    fields = {"problem": problem, "instance": ident, "params": params}
    if isinstance(inst, DiamondInstance):
        terminals = _int_list(args.terminals)
        if terminals is None:
            terminals = list(range(inst.graph.vertex_count))
        sol = steiner_exact(metric_closure(inst.graph), terminals, args.root)
        fields.update(terminals=terminals, cost=fmt(sol.cost), tree_edges=[list(e) for e in sol.tree_edges])
    elif isinstance(inst, HstInstance):
        clients = _int_list(args.clients)
        if clients is None:
            clients = list(inst.client_vertices)
        sol = ufl_exact(inst, clients)
        fields.update(
            clients=clients, cost=fmt(sol.cost), open_facilities=sorted(sol.open_facilities),
        )
    else:
        requests = _int_list(args.requests)
        if requests is not None:
            inst = inst.with_requests(requests)
        dec = even_odd_free(inst)
        fields.update(
            requests=list(inst.requests),
            size=max_matching(inst),
            even=sorted(map(list, dec.even)),
            odd=sorted(map(list, dec.odd)),
            free=sorted(map(list, dec.free)),
        )
    _emit(dumps(_record("solve", args, **fields)), args.out)
    return 0


def _gap_target(args):
    """Cost table plus record fields (problem, instance, params, known lower bound)."""
    if args.file:
        obj = _read_json(args.file)
        if "type" in obj:
            inst = instance_from_json(obj)
        else:
            return set_function_from_json(obj), {"problem": "custom", "instance": Path(args.file).name}
    else:
        inst = _build_instance(args)
    problem, ident, params = _instance_id(inst)
    fields = {"problem": problem, "instance": ident, "params": params}
    if isinstance(inst, DiamondInstance):
        c = rooted_steiner_table(inst)
        fields["lower_bound"] = fmt(estimating_lower_bound(steiner_t_sequence(inst.depth), inst.depth))
    elif isinstance(inst, HstInstance):
        c = ufl_cost_table(inst)
        fields["lower_bound"] = fmt(ufl_gap_bound(inst.depth, inst.alpha))
    else:
        if not inst.requests:
            raise UsageError("matching gap needs --requests")
        c = matching_table(inst)
        fields["lower_bound"] = fmt(1)
    return c, fields


def cmd_gap(args) -> int:
    c, fields = _gap_target(args)
    exact = {"auto": None, "exact": True, "float": False}[args.solver]
    result = submodularity_gap(c, exact=exact)
    fields.update(n=c.n, result=result.to_json())
    _emit(dumps(_record("gap", args, **fields)), args.out)
    return 0


def cmd_bounds(args) -> int:
    if args.problem == "steiner":
        k, alpha = _need(args, "k"), None
    else:
        k, alpha = _need(args, "d"), _alpha(args)
    rows = bound_rows(args.problem, k, alpha)
    if args.format == "json":
        recs = [{"j": j, "t_j": fmt(t), "f_lower_j": fmt(f), "ratio": fmt(r)} for j, t, f, r in rows]
        text = dumps(_record("bounds", args, problem=args.problem, rows=recs))
    else:
        text = csv_text(["j", "t_j", "f_lower_j", "ratio"], [list(r) for r in rows])
    _emit(text, args.out)
    return 0


def cmd_frt(args) -> int:
    if args.metric_file:
        m = metric_from_json(_read_json(args.metric_file))
        ident = Path(args.metric_file).name
    else:
        inst = build_diamond(_need(args, "k"))
        m = metric_closure(inst.graph)
        ident = f"diamond-k{inst.depth}"
    ground = [p for p in range(m.size) if p != args.root]
    proxy = proxy_function(m, ground, args.samples, args.seed, root=args.root)
    for t in proxy.samples:
        check_frt_tree(t, m)
    cx = steiner_cost_table(m, ground, args.root)
    if any(proxy.tabulation[S] < cx[S] for S in range(2**cx.n)):
        raise InvariantViolation("proxy falls below the metric Steiner cost")
    rows = distortion_rows(m, proxy.samples)
    csv_rows = [[f"{i}-{j}", x, mean, mx] for i, j, x, mean, mx in rows]
    table = csv_text(["pair", "X_ij", "mean_T_ij", "max_T_ij"], csv_rows)
    stats = {
        "max_mean_ratio": fmt(max(mean / x for _, _, x, mean, _ in rows)),
        "max_ratio": fmt(max(mx / x for _, _, x, _, mx in rows)),
        "envelope_ratio": fmt(envelope_ratio(cx, proxy.tabulation)),
    }
    record = _record("frt", args, instance=ident, n=len(ground), stats=stats, proxy=proxy.tabulation.to_json())
    if args.format == "csv":
        _emit(table, args.out)
        return 0
    _emit(dumps(record), args.out)
    if args.out is not None:
        Path(args.out).with_suffix(".distortion.csv").write_text(table)
    return 0


def cmd_check(args) -> int:
    f = set_function_from_json(_read_json(args.file))
    w = is_submodular(f)
    if w.holds:
        print("submodular")
        return 0
    print(f"not submodular: {w.describe(f)}")
    return 4


_REPORT_COLUMNS = [
    "file", "kind", "problem", "instance", "n", "lambda_star", "certified_upper",
    "lower_bound", "upper_envelope", "max_mean_distortion",
]


def _report_row(name: str, obj) -> dict:
    if not isinstance(obj, dict) or obj.get("kind") not in ("gap", "frt"):
        raise SchemaError(f"{name}: not a gap or frt result record")
    try:
        if obj["kind"] == "gap":
            res = obj["result"]
            return {
                "file": name, "kind": "gap", "problem": obj["problem"], "instance": obj["instance"],
                "n": obj["n"], "lambda_star": res["lambda_star"] if res["exact"] else res["lambda_float"],
                "certified_upper": res["certified_upper"], "lower_bound": obj.get("lower_bound"),
            }
        stats = obj["stats"]
        return {
            "file": name, "kind": "frt", "problem": "steiner", "instance": obj["instance"], "n": obj["n"],
            "upper_envelope": stats["envelope_ratio"], "max_mean_distortion": stats["max_mean_ratio"],
        }
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{name}: missing field {exc}") from exc


def cmd_report(args) -> int:
    rows = [_report_row(p, _read_json(p)) for p in args.files]
    if args.format == "json":
        text = dumps(_record("report", args, records=rows))
    else:
        text = csv_text(_REPORT_COLUMNS, [[r.get(c) for c in _REPORT_COLUMNS] for r in rows])
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="submodgap", description="Submodularity gap laboratory.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt_default="json"):
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=["json", "csv"], default=fmt_default)
        sp.add_argument("--seed", type=int, default=0)

    def instance_flags(sp):
        sp.add_argument("--instance", choices=["diamond", "hst", "bipartite"])
        sp.add_argument("--k", type=int, help="diamond depth")
        sp.add_argument("--d", type=int, help="HST depth")
        sp.add_argument("--alpha", help="HST ratio as p/q (must be 1/m)")
        sp.add_argument("--u", type=int, help="size of U for matching")
        sp.add_argument("--requests", help="comma-separated V indices (repeats allowed)")

    sp = sub.add_parser("gen", help="write an instance as JSON")
    common(sp)
    instance_flags(sp)
    sp.set_defaults(func=cmd_gen, file=None)

    sp = sub.add_parser("solve", help="solve an instance exactly")
    common(sp)
    instance_flags(sp)
    sp.add_argument("--file", help="instance JSON")
    sp.add_argument("--terminals", help="Steiner terminals (default: all vertices)")
    sp.add_argument("--root", type=int, help="Steiner root")
    sp.add_argument("--clients", help="client vertices (default: all)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("gap", help="submodularity gap LP")
    common(sp)
    instance_flags(sp)
    sp.add_argument("--file", help="SetFunction or instance JSON")
    sp.add_argument("--solver", choices=["auto", "exact", "float"], default="auto")
    sp.set_defaults(func=cmd_gap)

    sp = sub.add_parser("bounds", help="closed-form lower-bound table")
    common(sp, "csv")
    sp.add_argument("--problem", choices=["steiner", "ufl"], required=True)
    sp.add_argument("--k", type=int)
    sp.add_argument("--d", type=int)
    sp.add_argument("--alpha")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("frt", help="FRT proxy and distortion report")
    common(sp)
    sp.add_argument("--k", type=int, help="use the diamond D_k metric")
    sp.add_argument("--metric-file", help="metric or instance JSON")
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--root", type=int, help="root point; tree costs then span it")
    sp.set_defaults(func=cmd_frt)

    sp = sub.add_parser("check", help="test a SetFunction JSON for submodularity")
    sp.add_argument("--file", required=True)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("report", help="merge result records into one table")
    common(sp, "csv")
    sp.add_argument("files", nargs="*")
    sp.set_defaults(func=cmd_report)
    return p


def _check_threads() -> None:
    # accepted for interface compatibility; all work runs on one thread
    value = os.environ.get("SUBMODGAP_THREADS")
    if value is not None and (not value.isdigit() or int(value) < 1):
        raise UsageError(f"SUBMODGAP_THREADS must be a positive integer, got {value!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_threads()
        return args.func(args)
    except (UsageError, SchemaError, PreconditionError) as exc:
        print(f"submodgap: error: {exc}", file=sys.stderr)
        return 2
    except SizeLimitError as exc:
        print(f"submodgap: size limit: {exc}", file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        print(f"submodgap: invariant violation: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
