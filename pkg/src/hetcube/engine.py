"""One-round execution: hash, route, join locally, account loads.

The pipeline is bounds -> partition -> packing -> route -> local join.
Every tuple of relation S_j goes to each machine whose (grid-clipped) box,
projected onto S_j's variables, contains the tuple's hashed image. Each
machine then joins its shard and keeps exactly the outputs whose hashed
image lies in its own box, so every output tuple is produced once.

Dense inputs use the identity hash; matching inputs get one random
permutation of the domain per variable, which preserves the at-most-once
column structure while spreading tuples.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import partition
from .bounds import (
    PLAN_KINDS,
    UNEQUAL_PLAN_KINDS,
    BoundReport,
    InstanceSchema,
    compute_bound_report,
)
from .costs import MachineFleet, evaluate_cost
from .datagen import DatabaseInstance
from .packing import Placement, pack
from .partition import Hyperrectangle
from .query import Query, minimum_fractional_vertex_cover


class EngineError(ValueError):
    pass


class OutputOverlapError(RuntimeError):
    """Two machines produced the same output tuple. Must never happen."""


@dataclass(frozen=True)
class HashFamily:
    mode: str  # "identity" | "random"
    n: int
    perms: tuple[tuple[int, ...] | None, ...]  # one per variable

    def apply_var(self, var_index: int, value: int) -> int:
        perm = self.perms[var_index]
        return value if perm is None else perm[value]

    def apply(self, point: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.apply_var(i, v) for i, v in enumerate(point))


def make_hash_family(mode: str, n: int, k: int, seed: int) -> HashFamily:
    if mode == "identity":
        return HashFamily(mode, n, (None,) * k)
    if mode == "random":
        perms = []
        for i in range(k):
            rng = random.Random(f"{seed}:h{i}")
            perm = list(range(n))
            rng.shuffle(perm)
            perms.append(tuple(perm))
        return HashFamily(mode, n, tuple(perms))
    raise EngineError(f"unknown hash mode {mode!r}")


Shards = dict[int, dict[str, list[tuple[int, ...]]]]


def route(
    q: Query,
    instance: DatabaseInstance,
    placement: Placement,
    hashes: HashFamily,
) -> Shards:
    """Deliver each tuple to every machine whose projected box contains its
    hashed image. A tuple may be replicated to many machines."""
    shards: Shards = {
        b.machine_id: {a.name: [] for a in q.atoms}
        for b in placement.boxes
        if not b.grid_empty
    }
    for atom in q.atoms:
        var_idx = q.atom_var_indices(atom)
        targets = []
        for b in placement.boxes:
            if b.grid_empty:
                continue
            intervals = [(b.grid_lo[i], b.grid_hi[i]) for i in var_idx]
            targets.append((b.machine_id, intervals))
        for t in instance.relations[atom.name]:
            image = [hashes.apply_var(i, v) for i, v in zip(var_idx, t)]
            for machine_id, intervals in targets:
                if all(lo <= x < hi for x, (lo, hi) in zip(image, intervals)):
                    shards[machine_id][atom.name].append(t)
    return shards


def local_join(
    q: Query,
    shard: Mapping[str, Sequence[tuple[int, ...]]],
    grid_lo: Sequence[int],
    grid_hi: Sequence[int],
    hashes: HashFamily,
) -> set[tuple[int, ...]]:
    """Hash join over the shard, keeping outputs whose hashed image lies in
    the machine's box. Each variable is pruned as soon as it binds."""
    k = q.num_variables

    def in_box(var: int, value: int) -> bool:
        return grid_lo[var] <= hashes.apply_var(var, value) < grid_hi[var]

    partials: list[dict[int, int]] = [{}]
    for atom in q.atoms:
        var_idx = q.atom_var_indices(atom)
        tuples = shard.get(atom.name, ())
        if not partials:
            return set()
        bound = [i for i in var_idx if i in partials[0]]
        fresh = [i for i in var_idx if i not in partials[0]]
        index: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
        for t in tuples:
            vals = dict(zip(var_idx, t))
            if all(in_box(i, vals[i]) for i in fresh):
                index.setdefault(tuple(vals[i] for i in bound), []).append(
                    tuple(vals[i] for i in fresh)
                )
        nxt = []
        for p in partials:
            key = tuple(p[i] for i in bound)
            for ext in index.get(key, ()):
                grown = dict(p)
                grown.update(zip(fresh, ext))
                nxt.append(grown)
        partials = nxt
    return {tuple(p[i] for i in range(k)) for p in partials}


def brute_force_join(q: Query, instance: DatabaseInstance) -> frozenset:
    """Ground-truth join by plain nested loops with consistency pruning."""
    relations = [instance.relations[a.name] for a in q.atoms]
    var_idx = [q.atom_var_indices(a) for a in q.atoms]
    k = q.num_variables
    out: set[tuple[int, ...]] = set()
    assign: list[int | None] = [None] * k

    def descend(level: int) -> None:
        if level == len(relations):
            out.add(tuple(assign))  # type: ignore[arg-type]
            return
        for t in relations[level]:
            added = []
            ok = True
            for pos, vi in enumerate(var_idx[level]):
                if assign[vi] is None:
                    assign[vi] = t[pos]
                    added.append(vi)
                elif assign[vi] != t[pos]:
                    ok = False
                    break
            if ok:
                descend(level + 1)
            for vi in added:
                assign[vi] = None

    descend(0)
    return frozenset(out)


def plan_rectangles(
    q: Query,
    schema: InstanceSchema,
    fleet: MachineFleet,
    kind: str,
    tol: float = 1e-6,
) -> tuple[BoundReport, list[Hyperrectangle]]:
    """Bounds plus side lengths for one plan kind."""
    if kind not in PLAN_KINDS:
        raise EngineError(f"unknown plan kind {kind!r}")
    report = compute_bound_report(q, schema, fleet, kind, tol)
    if kind == "equal-linear":
        cover = minimum_fractional_vertex_cover(q)
        rects = partition.equal_card_linear_dims(q, schema, fleet, cover)
    elif kind == "equal-general":
        cover = minimum_fractional_vertex_cover(q)
        rects = partition.equal_card_general_dims(
            q, schema, fleet, cover, report.load_lower
        )
    else:
        builder = {
            "cartesian": partition.cartesian_dims,
            "binary-join": partition.binary_join_dims,
            "star": partition.star_dims,
            "triangle": partition.triangle_dims,
        }[kind]
        rects = builder(q, schema, fleet, report.load_lower)
    return report, rects


@dataclass
class MachineLoad:
    machine_id: int
    tuples_per_atom: dict[str, int]
    bits: int
    cost: float


@dataclass
class LoadReport:
    machines: list[MachineLoad]
    max_cost: float
    lower_bound: float
    predicted_upper: float
    ratio: float | None  # max_cost / (lower_bound * log2 n)
    output_size: int

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "machines": [
                {
                    "id": m.machine_id,
                    "tuples_per_atom": m.tuples_per_atom,
                    "bits": m.bits,
                    "cost": m.cost,
                }
                for m in self.machines
            ],
            "max_cost": self.max_cost,
            "lower_bound": self.lower_bound,
            "predicted_upper": self.predicted_upper,
            "ratio": self.ratio,
            "output_size": self.output_size,
        }


@dataclass
class RoundResult:
    output: frozenset
    report: LoadReport
    placement: Placement | None = None
    bound: BoundReport | None = None
    per_machine_outputs: dict[int, set] = field(default_factory=dict)


def run_one_round(
    q: Query,
    instance: DatabaseInstance,
    fleet: MachineFleet,
    kind: str,
    seed: int,
    tol: float = 1e-6,
) -> RoundResult:
    """Plan, partition, pack, route, join and account one full round."""
    cards = instance.cardinalities(q)
    if min(cards) == 0:
        empty = [
            MachineLoad(mc.id, {a.name: 0 for a in q.atoms}, 0, 0.0) for mc in fleet
        ]
        report = LoadReport(empty, 0.0, 0.0, 0.0, None, 0)
        return RoundResult(frozenset(), report)

    schema = instance.schema(q)
    bound, rects = plan_rectangles(q, schema, fleet, kind, tol)
    placement = pack(rects, schema.n, q.num_variables)
    hashes = make_hash_family(
        "identity" if instance.kind == "dense" else "random",
        schema.n,
        q.num_variables,
        seed,
    )
    shards = route(q, instance, placement, hashes)

    per_machine: dict[int, set] = {}
    loads: list[MachineLoad] = []
    for mc in fleet:
        box = placement.box(mc.id)
        shard = shards.get(mc.id, {})
        counts = {a.name: len(shard.get(a.name, ())) for a in q.atoms}
        bits = sum(
            counts[a.name] * schema.tuple_bits(j) for j, a in enumerate(q.atoms)
        )
        loads.append(MachineLoad(mc.id, counts, bits, evaluate_cost(mc.cost, bits)))
        if not box.grid_empty:
            per_machine[mc.id] = local_join(
                q, shard, box.grid_lo, box.grid_hi, hashes
            )

    total = sum(len(s) for s in per_machine.values())
    output = frozenset().union(*per_machine.values()) if per_machine else frozenset()
    if total != len(output):
        raise OutputOverlapError("per-machine outputs overlap")

    max_cost = max(m.cost for m in loads)
    denom = bound.load_lower * math.log2(schema.n)
    report = LoadReport(
        machines=loads,
        max_cost=max_cost,
        lower_bound=bound.load_lower,
        predicted_upper=bound.predicted_upper,
        ratio=max_cost / denom if denom > 0 else None,
        output_size=len(output),
    )
    return RoundResult(output, report, placement, bound, per_machine)
