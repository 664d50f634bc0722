"""Command-line front end: plan | pack | gen | run | verify | sweep.

Inputs come from an optional JSON config file plus flag overrides. Queries
are text files with one atom per line (``S1(x,z)``); fleets are JSON lists
of machine entries ``{"id": 1, "kind": "linear", "weight": 4}``. All JSON
reports carry ``"schema": 1``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import random
import sys
from fractions import Fraction
from pathlib import Path

from .bounds import InstanceSchema, PLAN_KINDS, compute_bound_report
from .costs import LinearCost, Machine, MachineFleet, PolynomialCost, TableCost
from .datagen import DenseSpec, MatchingSpec, gen_dense, gen_matching
from .engine import brute_force_join, plan_rectangles, run_one_round
from .packing import pack
from .partition import PartitionError
from .query import Query, parse_query


class CliError(ValueError):
    pass


def _load_query(value: str) -> Query:
    path = Path(value)
    if path.exists():
        return parse_query(path.read_text())
    return parse_query(value.replace(";", "\n"))


def _machine_from_entry(entry: dict) -> Machine:
    kind = entry.get("kind", "linear")
    if kind == "linear":
        cost = LinearCost(int(entry["weight"]))
    elif kind == "poly":
        cost = PolynomialCost(float(entry["exponent"]), float(entry["weight"]))
    elif kind == "table":
        points = tuple((int(b), Fraction(str(c))) for b, c in entry["points"])
        cost = TableCost(points, float(entry.get("growth_exponent", 2.0)))
    else:
        raise CliError(f"unknown cost kind {kind!r}")
    return Machine(int(entry["id"]), cost)


def _load_fleet(value) -> MachineFleet:
    if isinstance(value, str):
        path = Path(value)
        doc = json.loads(path.read_text()) if path.exists() else json.loads(value)
    else:
        doc = value
    entries = doc["machines"] if isinstance(doc, dict) else doc
    return MachineFleet(tuple(_machine_from_entry(e) for e in entries))


def _merge_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if getattr(args, "config", None):
        cfg.update(json.loads(Path(args.config).read_text()))
    for key in (
        "query",
        "fleet",
        "n",
        "dist",
        "theta",
        "m",
        "cardinalities",
        "plan",
        "seed",
        "seeds",
        "tol",
        "bernoulli",
    ):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg.setdefault("theta", 0.5)
    cfg.setdefault("tol", 1e-6)
    cfg.setdefault("seed", 0)
    return cfg


def _resolve_schema(q: Query, cfg: dict) -> InstanceSchema:
    n = int(cfg["n"])
    if cfg.get("cardinalities"):
        cards = [int(x) for x in str(cfg["cardinalities"]).split(",")]
    elif cfg.get("m"):
        cards = [int(cfg["m"])] * q.num_atoms
    elif cfg.get("dist") == "dense":
        theta = Fraction(float(cfg["theta"]))
        cards = [int(theta * n**r) for r in q.arities]
    else:
        raise CliError("need --m, --cardinalities, or a dense distribution")
    return InstanceSchema.of(q, n, cards)


def _make_instance(q: Query, cfg: dict, seed: int):
    n = int(cfg["n"])
    if cfg["dist"] == "dense":
        return gen_dense(
            q, DenseSpec(n, float(cfg["theta"]), seed, bool(cfg.get("bernoulli")))
        )
    if cfg["dist"] == "matching":
        schema = _resolve_schema(q, cfg)
        return gen_matching(
            q, MatchingSpec(n, schema.cardinalities, seed, float(cfg["theta"]))
        )
    raise CliError("--dist must be matching or dense")


def _emit(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def cmd_plan(args: argparse.Namespace) -> int:
    cfg = _merge_config(args)
    q = _load_query(cfg["query"])
    fleet = _load_fleet(cfg["fleet"])
    schema = _resolve_schema(q, cfg)
    report, rects = plan_rectangles(q, schema, fleet, cfg["plan"], cfg["tol"])
    doc = {"schema": 1, "plan": cfg["plan"], "n": schema.n}
    doc.update(report.to_json())
    _emit(doc, args.report)
    if args.emit_dims:
        with open(args.emit_dims, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["machine", "var", "lambda"])
            for r in rects:
                for var, side in zip(q.variables, r.sides):
                    writer.writerow([r.machine_id, var, repr(side)])
    return 0


def cmd_pack(args: argparse.Namespace) -> int:
    cfg = _merge_config(args)
    q = _load_query(cfg["query"])
    fleet = _load_fleet(cfg["fleet"])
    schema = _resolve_schema(q, cfg)
    _, rects = plan_rectangles(q, schema, fleet, cfg["plan"], cfg["tol"])
    placement = pack(rects, schema.n, q.num_variables)
    _emit(placement.to_json(), args.report)
    trace = "\n".join(placement.trace)
    if args.trace:
        Path(args.trace).write_text(trace + "\n")
    else:
        print(trace, file=sys.stderr)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    cfg = _merge_config(args)
    q = _load_query(cfg["query"])
    instance = _make_instance(q, cfg, int(cfg["seed"]))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for atom in q.atoms:
        path = out_dir / f"{atom.name}.csv"
        lines = [f"# atom={atom.name} arity={atom.arity} n={instance.n}"]
        lines += [",".join(map(str, t)) for t in instance.relations[atom.name]]
        path.write_text("\n".join(lines) + "\n")
        print(f"wrote {path}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _merge_config(args)
    q = _load_query(cfg["query"])
    fleet = _load_fleet(cfg["fleet"])
    instance = _make_instance(q, cfg, int(cfg["seed"]))
    result = run_one_round(q, instance, fleet, cfg["plan"], int(cfg["seed"]), cfg["tol"])
    _emit(result.report.to_json(), args.report)
    return 0


def _check(label: str, ok: bool, failures: list[str]) -> None:
    print(f"{'ok  ' if ok else 'FAIL'} {label}")
    if not ok:
        failures.append(label)


def _grid_points(n: int, k: int, limit: int = 65536):
    if n**k <= limit:
        points = [()]
        for _ in range(k):
            points = [p + (v,) for p in points for v in range(n)]
        return points
    rng = random.Random(0)
    return [tuple(rng.randrange(n) for _ in range(k)) for _ in range(limit // 16)]


def _verify_placement_doc(doc: dict, failures: list[str]) -> None:
    n, k = int(doc["n"]), int(doc["k"])
    boxes = [m for m in doc["machines"] if m["used"]]
    ok = True
    for p in _grid_points(n, k):
        owners = sum(
            all(lo <= x < hi for x, lo, hi in zip(p, m["grid_lo"], m["grid_hi"]))
            for m in boxes
        )
        if owners != 1:
            ok = False
            break
    _check("placement file covers every grid point exactly once", ok, failures)


def cmd_verify(args: argparse.Namespace) -> int:
    failures: list[str] = []
    if args.placement:
        doc = json.loads(Path(args.placement).read_text())
        _verify_placement_doc(doc, failures)
        return 1 if failures else 0

    cfg = _merge_config(args)
    q = _load_query(cfg["query"])
    fleet = _load_fleet(cfg["fleet"])
    instance = _make_instance(q, cfg, int(cfg["seed"]))
    result = run_one_round(q, instance, fleet, cfg["plan"], int(cfg["seed"]), cfg["tol"])

    oracle = brute_force_join(q, instance)
    _check("one-round output equals nested-loop join", result.output == oracle, failures)

    placement = result.placement
    if placement is not None:
        points = _grid_points(placement.n, placement.k)
        cover_ok = all(len(placement.owners_by_scan(p)) == 1 for p in points)
        locate_ok = all(
            placement.locate(p) == placement.owners_by_scan(p)[0] for p in points
        )
        _check("every grid point owned by exactly one machine", cover_ok, failures)
        _check("tree lookup agrees with box scan", locate_ok, failures)

        schema = instance.schema(q)
        _, rects = plan_rectangles(q, schema, fleet, cfg["plan"], cfg["tol"])
        infl_ok = True
        for r in rects:
            box = placement.box(r.machine_id)
            if not box.used:
                continue
            for atom in q.atoms:
                idx = q.atom_var_indices(atom)
                allowed = 2 ** (q.num_variables + 1 + atom.arity)
                before = r.projection_volume(idx)
                after = math.prod(box.sides[i] for i in idx)
                if after > allowed * before * (1 + 1e-9):
                    infl_ok = False
        _check("projection inflation within guarantee", infl_ok, failures)
        _check(
            "scale product within guarantee",
            math.prod(placement.scale) <= 2 ** (placement.k + 1) * (1 + 1e-9),
            failures,
        )
    else:
        _check("empty input produced empty output", len(result.output) == 0, failures)

    print("verify:", "FAIL" if failures else "pass")
    return 1 if failures else 0


def _sweep_fleets(cfg: dict, param: str, value: float) -> tuple[dict, MachineFleet]:
    cfg = dict(cfg)
    if param == "p":
        fleet = MachineFleet.linear([1] * int(value))
    elif param == "skew":
        p = int(cfg.get("p", 8))
        fleet = MachineFleet.linear(
            [max(1, round(value**c)) for c in range(p)]
        )
    else:
        fleet = _load_fleet(cfg["fleet"])
        if param == "theta":
            cfg["theta"] = float(value)
        elif param == "m":
            cfg["m"] = int(value)
        else:
            raise CliError(f"unknown sweep parameter {param!r}")
    return cfg, fleet


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _merge_config(args)
    q = _load_query(cfg["query"])
    seeds = cfg.get("seeds") or [int(cfg["seed"])]
    rows = []
    for raw in args.values.split(","):
        value = float(raw)
        run_cfg, fleet = _sweep_fleets(cfg, args.param, value)
        for seed in seeds:
            instance = _make_instance(q, run_cfg, int(seed))
            result = run_one_round(
                q, instance, fleet, run_cfg["plan"], int(seed), run_cfg["tol"]
            )
            rows.append(
                [
                    args.param,
                    raw,
                    seed,
                    result.report.max_cost,
                    result.report.lower_bound,
                    result.report.ratio,
                ]
            )
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    writer.writerow(["parameter", "value", "seed", "max_cost", "lower_bound", "ratio"])
    writer.writerows(rows)
    if args.out:
        out.close()
    return 0


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags override it")
    sub.add_argument("--query", help="query file or inline atoms 'S1(x,z);S2(y,z)'")
    sub.add_argument("--fleet", help="fleet JSON file or inline JSON")
    sub.add_argument("--n", type=int, help="domain size")
    sub.add_argument("--dist", choices=["matching", "dense"])
    sub.add_argument("--theta", type=float)
    sub.add_argument("--m", type=int, help="uniform cardinality")
    sub.add_argument("--cardinalities", help="comma-separated per-atom cardinalities")
    sub.add_argument("--plan", choices=list(PLAN_KINDS))
    sub.add_argument("--seed", type=int)
    sub.add_argument("--tol", type=float)
    sub.add_argument("--bernoulli", action="store_true", default=None)
    sub.add_argument("--report", help="write the JSON report here (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetcube",
        description="plan and simulate one-round joins on heterogeneous fleets",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("plan", help="bounds and side lengths")
    _add_common(p)
    p.add_argument("--emit-dims", help="write per-machine sides CSV here")
    p.set_defaults(func=cmd_plan)

    p = subs.add_parser("pack", help="pack side lengths into a grid cover")
    _add_common(p)
    p.add_argument("--trace", help="write the merge trace here (default stderr)")
    p.set_defaults(func=cmd_pack)

    p = subs.add_parser("gen", help="generate relation files")
    _add_common(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_gen)

    p = subs.add_parser("run", help="simulate one round and report loads")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = subs.add_parser("verify", help="run the invariant suite")
    _add_common(p)
    p.add_argument("--placement", help="check a placement JSON file instead")
    p.set_defaults(func=cmd_verify)

    p = subs.add_parser("sweep", help="vary one parameter, emit CSV")
    _add_common(p)
    p.add_argument("--param", required=True, choices=["p", "theta", "m", "skew"])
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, PartitionError, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
