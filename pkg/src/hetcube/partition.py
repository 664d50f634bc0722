"""Per-machine hyperrectangle side lengths for every supported plan.

Each machine is assigned a box inside the output grid [n]^k; the projection
of the box onto an atom's variables determines how many tuples the machine
can be asked to receive. The constructions here only pick side lengths.
Positioning the boxes so they tile the grid is the packing module's job,
which relies on one property guaranteed here: a heavier machine's box
dominates a lighter machine's box in every dimension.

Sides stay real-valued at this stage; rounding to powers of two happens
inside the packing step.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

from .bounds import InstanceSchema
from .costs import MachineFleet, lp_norm
from .query import Query, VertexCover


class PartitionError(ValueError):
    pass


class UnsupportedQueryError(PartitionError):
    """The query does not have one of the shapes this plan kind supports."""


@dataclass(frozen=True)
class Hyperrectangle:
    machine_id: int
    sides: tuple[float, ...]

    @property
    def volume(self) -> float:
        return math.prod(self.sides)

    def projection_volume(self, var_indices: Sequence[int]) -> float:
        return math.prod(self.sides[i] for i in var_indices)


def equal_card_linear_dims(
    q: Query, schema: InstanceSchema, fleet: MachineFleet, cover: VertexCover
) -> list[Hyperrectangle]:
    """Sides (w_c / ||w||_v)**v_i * n; volumes sum to exactly n**k."""
    schema.uniform_cardinality
    norm = lp_norm(fleet, cover.total)
    weights = fleet.linear_weights()
    n = schema.n
    exps = [float(v) for v in cover.weights]
    return [
        Hyperrectangle(mc.id, tuple((w / norm) ** e * n for e in exps))
        for mc, w in zip(fleet, weights)
    ]


def equal_card_general_dims(
    q: Query,
    schema: InstanceSchema,
    fleet: MachineFleet,
    cover: VertexCover,
    load: float,
) -> list[Hyperrectangle]:
    """Sides (g_c*(L) / m)**v_i * n for a general-cost fleet.

    The bit allowance ratio is clamped at 1 (search slack can push it just
    past m); a clamp far beyond slack is reported, not hidden.
    """
    m = schema.uniform_cardinality
    n = schema.n
    exps = [float(v) for v in cover.weights]
    rects = []
    oversized = []
    for mc in fleet:
        ratio = mc.cost.max_bits_within(load) / m
        if ratio > 1 + 1e-6:
            oversized.append(mc.id)
        ratio = min(ratio, 1.0)
        rects.append(Hyperrectangle(mc.id, tuple(ratio**e * n for e in exps)))
    if oversized:
        warnings.warn(
            f"bit allowance exceeds m for machines {oversized}; sides clamped at n",
            RuntimeWarning,
        )
    return rects


def _budget(load: float, weight: int) -> float:
    return load * weight


def _clamped_fraction(value: float, machine_id: int, flagged: list[int]) -> float:
    if value > 1 + 1e-9:
        flagged.append(machine_id)
    return min(value, 1.0)


def _warn_clamped(flagged: list[int], what: str) -> None:
    if flagged:
        warnings.warn(
            f"{what} exceeded the domain for machines {flagged}; clamped at n",
            RuntimeWarning,
        )


def require_cartesian(q: Query) -> None:
    ok = all(a.arity == 1 for a in q.atoms) and q.num_atoms == q.num_variables
    if ok:
        seen = [v for a in q.atoms for v in a.variables]
        ok = sorted(seen) == sorted(q.variables)
    if not ok:
        raise UnsupportedQueryError("cartesian plan needs one unary atom per variable")


def cartesian_dims(
    q: Query, schema: InstanceSchema, fleet: MachineFleet, load: float
) -> list[Hyperrectangle]:
    """Cartesian product: each dimension independently min(L w_c / m_j, 1) * n."""
    require_cartesian(q)
    n = schema.n
    size_of_var = {}
    for j, atom in enumerate(q.atoms):
        size_of_var[atom.variables[0]] = schema.cardinalities[j]
    weights = fleet.linear_weights()
    return [
        Hyperrectangle(
            mc.id,
            tuple(
                min(_budget(load, w) / size_of_var[v], 1.0) * n for v in q.variables
            ),
        )
        for mc, w in zip(fleet, weights)
    ]


def _atoms_by_size(q: Query, schema: InstanceSchema) -> list[int]:
    return sorted(
        range(q.num_atoms), key=lambda j: (-schema.cardinalities[j], j)
    )


def require_binary_join(q: Query) -> str:
    """Validate the two-atom join shape and return the shared variable."""
    if q.num_atoms == 2 and all(a.arity == 2 for a in q.atoms) and q.num_variables == 3:
        shared = set(q.atoms[0].variables) & set(q.atoms[1].variables)
        if len(shared) == 1:
            return shared.pop()
    raise UnsupportedQueryError(
        "binary-join plan needs two binary atoms sharing one variable"
    )


def binary_join_dims(
    q: Query, schema: InstanceSchema, fleet: MachineFleet, load: float
) -> list[Hyperrectangle]:
    """Join of two relations: full sides except (L w_c / m_max) * n on the
    shared variable, sized against the larger relation."""
    shared = require_binary_join(q)
    n = schema.n
    m_max = max(schema.cardinalities)
    weights = fleet.linear_weights()
    flagged: list[int] = []
    rects = []
    for mc, w in zip(fleet, weights):
        frac = _clamped_fraction(_budget(load, w) / m_max, mc.id, flagged)
        rects.append(
            Hyperrectangle(
                mc.id, tuple(frac * n if v == shared else float(n) for v in q.variables)
            )
        )
    _warn_clamped(flagged, "shared-variable side")
    return rects


def require_star(q: Query) -> str:
    """Validate the star shape (binary arms sharing one hub) and return the hub."""
    if q.num_atoms >= 2 and all(a.arity == 2 for a in q.atoms):
        hubs = set(q.atoms[0].variables)
        for a in q.atoms[1:]:
            hubs &= set(a.variables)
        if len(hubs) == 1 and q.num_variables == q.num_atoms + 1:
            return hubs.pop()
    raise UnsupportedQueryError(
        "star plan needs binary atoms all sharing a single hub variable"
    )


def star_dims(
    q: Query, schema: InstanceSchema, fleet: MachineFleet, load: float
) -> list[Hyperrectangle]:
    """Star query: hub side (L w_c / m_max) * n, every arm side n."""
    hub = require_star(q)
    n = schema.n
    m_max = max(schema.cardinalities)
    weights = fleet.linear_weights()
    flagged: list[int] = []
    rects = []
    for mc, w in zip(fleet, weights):
        frac = _clamped_fraction(_budget(load, w) / m_max, mc.id, flagged)
        rects.append(
            Hyperrectangle(
                mc.id, tuple(frac * n if v == hub else float(n) for v in q.variables)
            )
        )
    _warn_clamped(flagged, "hub side")
    return rects


@dataclass(frozen=True)
class TriangleProfile:
    """Scale factors of one machine's box in the triangle construction.

    With cardinalities sorted m1 >= m2 >= m3 the factors satisfy
    fz >= fx >= fy, and the label records which of them reach 1.
    """

    fx: float
    fy: float
    fz: float
    label: str  # "small" | "medium" | "big"


def triangle_profile(
    schema: InstanceSchema, weight: int, load: float
) -> TriangleProfile:
    if len(schema.cardinalities) != 3:
        raise UnsupportedQueryError("triangle profile needs exactly three atoms")
    m1, m2, m3 = sorted(schema.cardinalities, reverse=True)
    budget = _budget(load, weight)
    fx = math.sqrt(budget * m2 / (m1 * m3))
    fy = math.sqrt(budget * m3 / (m1 * m2))
    fz = math.sqrt(budget * m1 / (m2 * m3))
    if fy >= 1:
        raise PartitionError(
            f"machine budget {budget} too large for the triangle construction "
            f"(fy={fy} >= 1)"
        )
    if fz < 1:
        label = "small"
    elif fx < 1:
        label = "medium"
    else:
        label = "big"
    return TriangleProfile(fx, fy, fz, label)


def triangle_scales_for_label(
    label: str, prof: TriangleProfile, weight: int, load: float, m1: int
) -> tuple[float, float, float]:
    """Box scales (of n) in role order (x, y, z) for a forced label.

    Exposed separately from the label decision so the branch formulas can be
    compared right at the label boundaries, where they must agree.
    """
    if label == "small":
        return (prof.fx, prof.fy, prof.fz)
    if label == "medium":
        return (prof.fx, prof.fy, 1.0)
    if label == "big":
        return (1.0, _budget(load, weight) / m1, 1.0)
    raise PartitionError(f"unknown triangle label {label!r}")


def require_triangle(q: Query) -> None:
    ok = (
        q.num_atoms == 3
        and q.num_variables == 3
        and all(a.arity == 2 for a in q.atoms)
    )
    if ok:
        for v in q.variables:
            if sum(v in a.variables for a in q.atoms) != 2:
                ok = False
    if not ok:
        raise UnsupportedQueryError(
            "triangle plan needs three binary atoms forming a cycle"
        )


def _triangle_roles(q: Query, order: list[int]) -> dict[str, str]:
    """Map role names to query variables: x joins atoms 1 and 3, y joins
    1 and 2, z joins 2 and 3 (atoms ordered by decreasing cardinality)."""
    a1, a2, a3 = (set(q.atoms[j].variables) for j in order)
    return {
        "x": (a1 & a3).pop(),
        "y": (a1 & a2).pop(),
        "z": (a2 & a3).pop(),
    }


def triangle_dims(
    q: Query, schema: InstanceSchema, fleet: MachineFleet, load: float
) -> list[Hyperrectangle]:
    """Triangle query: small/medium/big machines get differently shaped boxes."""
    require_triangle(q)
    order = _atoms_by_size(q, schema)
    roles = _triangle_roles(q, order)
    m1 = schema.cardinalities[order[0]]
    n = schema.n
    weights = fleet.linear_weights()
    flagged: list[int] = []
    rects = []
    for mc, w in zip(fleet, weights):
        prof = triangle_profile(schema, w, load)
        sx, sy, sz = triangle_scales_for_label(prof.label, prof, w, load, m1)
        sy = _clamped_fraction(sy, mc.id, flagged)
        by_role = {"x": sx * n, "y": sy * n, "z": sz * n}
        sides = tuple(
            by_role[next(r for r, v in roles.items() if v == var)]
            for var in q.variables
        )
        rects.append(Hyperrectangle(mc.id, sides))
    _warn_clamped(flagged, "triangle side")
    return rects
