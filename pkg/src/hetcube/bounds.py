"""Load lower bounds and matching upper-bound predictions.

Three regimes:

* uniform cardinalities, linear fleet: closed forms ``m / ||w||_u`` for the
  lower bound and ``m log2(n) / ||w||_v`` for the upper bound,
* uniform cardinalities, general well-behaved costs: the least load L with
  ``sum_c g_c*(L)**u >= m**u``, found by bisection on (0, min_c g_c(m)],
* per-atom cardinalities, linear fleet: the least load satisfying
  ``sum_c prod_j (L w_c / m_j)**u_{c,j} >= 1`` where each machine gets its
  own term-minimizing edge packing, found by doubling from the bracket floor
  ``max_j m_j / sum_c w_c`` and then bisecting.

Cardinalities (tuple counts) are the size measure inside these inequalities;
encoded bit sizes only enter the load accounting of the simulator. Search
probes are exact fractions so that bracket endpoints, where terms equal 1,
evaluate exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .costs import (
    CostFunction,
    LinearCost,
    MachineFleet,
    PolynomialCost,
    TableCost,
    lp_norm,
)
from .query import EdgePacking, Query, VertexCover, packing_polytope_vertices


class BoundsError(ValueError):
    pass


@dataclass(frozen=True)
class InstanceSchema:
    """Shape of a database instance: domain size and per-atom cardinalities."""

    n: int
    cardinalities: tuple[int, ...]
    arities: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 2:
            raise BoundsError("domain size must be at least 2")
        if len(self.cardinalities) != len(self.arities):
            raise BoundsError("cardinalities and arities must align")
        for m, r in zip(self.cardinalities, self.arities):
            if r < 1:
                raise BoundsError("arities must be positive")
            if not 1 <= m <= self.n**r:
                raise BoundsError(f"cardinality {m} outside [1, n**{r}]")

    @classmethod
    def of(cls, q: Query, n: int, cardinalities) -> "InstanceSchema":
        return cls(n, tuple(int(m) for m in cardinalities), q.arities)

    @classmethod
    def uniform(cls, q: Query, n: int, m: int) -> "InstanceSchema":
        return cls.of(q, n, [m] * q.num_atoms)

    @property
    def bits_per_value(self) -> int:
        return math.ceil(math.log2(self.n))

    def tuple_bits(self, j: int) -> int:
        return self.arities[j] * self.bits_per_value

    def encoded_bits(self, j: int) -> int:
        """Naive encoding size of atom j: m_j * r_j * ceil(log2 n) bits."""
        return self.cardinalities[j] * self.tuple_bits(j)

    @property
    def uniform_cardinality(self) -> int:
        values = set(self.cardinalities)
        if len(values) != 1:
            raise BoundsError("operation requires uniform cardinalities")
        return values.pop()


@dataclass(frozen=True)
class BoundReport:
    method: str
    load_lower: float
    predicted_upper: float
    packing: EdgePacking | None = None
    machine_packings: tuple[EdgePacking, ...] | None = None
    bracket: tuple[float, float] | None = None
    doubling_probes: int | None = None
    monotone_ok: bool = True

    def to_json(self) -> dict:
        doc: dict = {
            "method": self.method,
            "load_lower": self.load_lower,
            "predicted_upper": self.predicted_upper,
        }
        if self.packing is not None:
            doc["packing"] = [str(u) for u in self.packing.weights]
        if self.machine_packings is not None:
            doc["machine_packings"] = [
                [str(u) for u in p.weights] for p in self.machine_packings
            ]
        if self.bracket is not None:
            doc["bracket"] = list(self.bracket)
        if self.doubling_probes is not None:
            doc["doubling_probes"] = self.doubling_probes
            doc["monotone_ok"] = self.monotone_ok
        return doc


def upper_bound_linear(
    schema: InstanceSchema, fleet: MachineFleet, cover: VertexCover
) -> float:
    """Predicted one-round load m * log2(n) / ||w||_v for a vertex cover v."""
    m = schema.uniform_cardinality
    return m * math.log2(schema.n) / lp_norm(fleet, cover.total)


def lower_bound_linear(
    schema: InstanceSchema, fleet: MachineFleet, packing: EdgePacking
) -> float:
    """Load lower bound m / ||w||_u for an edge packing u."""
    m = schema.uniform_cardinality
    return m / lp_norm(fleet, packing.total)


def _cost_exact(f: CostFunction, bits: int) -> Fraction | None:
    if isinstance(f, LinearCost):
        return Fraction(bits, f.weight)
    if isinstance(f, PolynomialCost) and float(f.exponent).is_integer():
        return Fraction(bits) ** int(f.exponent) / Fraction(f.weight)
    if isinstance(f, TableCost):
        return f._cost_fraction(bits)
    return None


def general_load_feasible(
    fleet: MachineFleet, packing_total, m: int, load
) -> bool:
    """Whether sum_c g_c*(load)**u >= m**u."""
    u = float(packing_total)
    total = sum(float(mc.cost.max_bits_within(load)) ** u for mc in fleet)
    return total >= float(m) ** u


def lower_bound_general(
    schema: InstanceSchema,
    fleet: MachineFleet,
    packing: EdgePacking,
    tol: float = 1e-6,
) -> float:
    """Least load satisfying the pseudo-inverse condition, to relative tol.

    The returned load satisfies the condition and shrinking it by a factor
    (1 - tol) does not.
    """
    if tol <= 0:
        raise BoundsError("tolerance must be positive")
    m = schema.uniform_cardinality

    # one machine alone can always finish with load min_c g_c(m)
    ceilings = []
    for mc in fleet:
        exact = _cost_exact(mc.cost, m)
        ceilings.append(exact if exact is not None else mc.cost.cost(m))
    hi: Fraction | float = min(ceilings)
    while not general_load_feasible(fleet, packing.total, m, hi):
        # only reachable through rounding of an inexact cost at m
        hi = hi * (1 + 1e-12) if isinstance(hi, float) else float(hi) * (1 + 1e-12)
    lo = hi * 0
    while hi - lo > tol * hi:
        mid = (lo + hi) / 2
        if general_load_feasible(fleet, packing.total, m, mid):
            hi = mid
        else:
            lo = mid
    return float(hi)


def per_machine_edge_packing(q: Query, budget, sizes) -> EdgePacking:
    """Edge packing minimizing prod_j (budget / sizes_j)**u_j, exactly.

    ``budget`` is the bit or tuple allowance of one machine (L * w_c) and
    ``sizes`` the per-atom sizes in the same measure. Vertices of the packing
    polytope are compared through the equivalent rational product, so the
    selection is exact; ties go to the lexicographically largest weight
    vector, which keeps weight on earlier (larger) atoms.
    """
    b = Fraction(budget)
    if b <= 0:
        raise BoundsError("packing budgets must be positive")
    sizes = tuple(Fraction(s) for s in sizes)
    if len(sizes) != q.num_atoms:
        raise BoundsError("one size per atom required")
    best: tuple[Fraction, ...] | None = None
    for v in packing_polytope_vertices(q):  # sorted ascending
        if best is None or _log_product_sign(b, sizes, v, best) <= 0:
            best = v
    assert best is not None
    return EdgePacking(best)


def _log_product_sign(
    b: Fraction,
    sizes: tuple[Fraction, ...],
    u: tuple[Fraction, ...],
    ref: tuple[Fraction, ...],
) -> int:
    """Sign of sum_j (u_j - ref_j) * log(b / sizes_j), computed exactly."""
    delta = [x - y for x, y in zip(u, ref)]
    den = 1
    for d in delta:
        den = den * d.denominator // math.gcd(den, d.denominator)
    value = Fraction(1)
    for d, s in zip(delta, sizes):
        e = int(d * den)
        if e:
            value *= (b / s) ** e
    return (value > 1) - (value < 1)


def _packing_term(q: Query, budget: Fraction, sizes) -> tuple[float, EdgePacking]:
    packing = per_machine_edge_packing(q, budget, sizes)
    value = 1.0
    for u, s in zip(packing.weights, sizes):
        if u:
            value *= float(Fraction(budget, s)) ** float(u)
    return value, packing


def lower_bound_unequal(
    q: Query,
    schema: InstanceSchema,
    fleet: MachineFleet,
    tol: float = 1e-6,
) -> BoundReport:
    """Optimal-load lower bound for per-atom cardinalities on a linear fleet."""
    if tol <= 0:
        raise BoundsError("tolerance must be positive")
    weights = fleet.linear_weights()
    sizes = schema.cardinalities
    max_size = max(sizes)
    bracket_lo = Fraction(max_size, sum(weights))
    bracket_hi = Fraction(max_size, max(weights))

    probe_log: list[tuple[Fraction, float]] = []

    def total(load: Fraction) -> float:
        value = sum(_packing_term(q, load * w, sizes)[0] for w in weights)
        probe_log.append((load, value))
        return value

    load = bracket_lo
    probes = 1
    while total(load) < 1.0:
        load *= 2
        probes += 1
        if load > bracket_hi * 4:
            raise BoundsError("doubling search escaped its bracket")

    if load == bracket_lo:
        result = load
    else:
        lo, hi = load / 2, load
        while hi - lo > tol * hi:
            mid = (lo + hi) / 2
            if total(mid) >= 1.0:
                hi = mid
            else:
                lo = mid
        result = hi

    monotone_ok = _probes_monotone(probe_log)
    if not monotone_ok:
        warnings.warn("feasibility total decreased between probes", RuntimeWarning)

    packings = tuple(
        _packing_term(q, result * w, sizes)[1] for w in weights
    )
    load_f = float(result)
    return BoundReport(
        method="unequal",
        load_lower=load_f,
        predicted_upper=load_f * math.log2(schema.n),
        machine_packings=packings,
        bracket=(float(bracket_lo), float(bracket_hi)),
        doubling_probes=probes,
        monotone_ok=monotone_ok,
    )


def _probes_monotone(log: list[tuple[Fraction, float]]) -> bool:
    ordered = sorted(log)
    return all(
        b[1] >= a[1] - 1e-12 for a, b in zip(ordered, ordered[1:])
    )


UNEQUAL_PLAN_KINDS = ("cartesian", "binary-join", "star", "triangle")
PLAN_KINDS = ("equal-linear", "equal-general") + UNEQUAL_PLAN_KINDS


def compute_bound_report(
    q: Query,
    schema: InstanceSchema,
    fleet: MachineFleet,
    kind: str,
    tol: float = 1e-6,
) -> BoundReport:
    """Bound report for one plan kind; the witness packing(s) ride along."""
    from .query import maximum_fractional_edge_packing, minimum_fractional_vertex_cover

    if kind not in PLAN_KINDS:
        raise BoundsError(f"unknown plan kind {kind!r}")
    if kind in UNEQUAL_PLAN_KINDS:
        return lower_bound_unequal(q, schema, fleet, tol)

    packing = maximum_fractional_edge_packing(q)
    if kind == "equal-linear":
        cover = minimum_fractional_vertex_cover(q)
        load = lower_bound_linear(schema, fleet, packing)
        predicted = upper_bound_linear(schema, fleet, cover)
    else:
        load = lower_bound_general(schema, fleet, packing, tol)
        predicted = load * math.log2(schema.n)
    return BoundReport(
        method=kind,
        load_lower=load,
        predicted_upper=predicted,
        packing=packing,
    )
