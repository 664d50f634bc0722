"""Shared test helpers: query zoo, independent oracles, random samplers.

The oracles here deliberately avoid the library's own algorithms: LP optima
come from an exhaustive search over a fraction grid, cost values from direct
formula evaluation, so production code is checked against something it does
not share a code path with.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from hetcube import MachineFleet, parse_query
from hetcube.query import Query, packing_polytope_vertices


def q_cartesian() -> Query:
    return parse_query("S1(x)\nS2(y)")


def q_binary_join() -> Query:
    return parse_query("S1(x,z)\nS2(y,z)")


def q_star(arms: int = 2) -> Query:
    return parse_query("\n".join(f"S{i+1}(z,x{i+1})" for i in range(arms)))


def q_triangle() -> Query:
    return parse_query("S1(x,y)\nS2(y,z)\nS3(z,x)")


QUERY_ZOO = {
    "cartesian": q_cartesian,
    "binary-join": q_binary_join,
    "star2": lambda: q_star(2),
    "star3": lambda: q_star(3),
    "triangle": q_triangle,
}


def grid_lp_oracle(q: Query, problem: str, denominator: int = 12) -> Fraction:
    """Optimal cover/packing total by exhaustive search over weight vectors
    with all coordinates in {0, 1/d, ..., 1}. Exact whenever the true optimum
    lies on that grid, which holds for every query in the zoo."""
    values = [Fraction(i, denominator) for i in range(denominator + 1)]
    if problem == "cover":
        best = None
        for v in itertools.product(values, repeat=q.num_variables):
            if all(
                sum(v[q.var_index(x)] for x in atom.variables) >= 1
                for atom in q.atoms
            ):
                total = sum(v)
                if best is None or total < best:
                    best = total
        assert best is not None
        return best
    best = Fraction(0)
    for u in itertools.product(values, repeat=q.num_atoms):
        feasible = all(
            sum(w for w, a in zip(u, q.atoms) if x in a.variables) <= 1
            for x in q.variables
        )
        if feasible:
            best = max(best, sum(u, Fraction(0)))
    return best


def random_query(rng: random.Random) -> Query:
    """Small random hypergraph query (every variable used by some atom)."""
    num_atoms = rng.randint(1, 4)
    pool = [f"v{i}" for i in range(rng.randint(1, 5))]
    lines = []
    for j in range(num_atoms):
        arity = rng.randint(1, min(3, len(pool)))
        vars_ = rng.sample(pool, arity)
        lines.append(f"S{j+1}({','.join(vars_)})")
    return parse_query("\n".join(lines))


def random_feasible_packing(q: Query, rng: random.Random):
    """Random point of the packing polytope with positive total: a random
    convex combination of its vertices, randomly shrunk."""
    from hetcube import EdgePacking

    verts = packing_polytope_vertices(q)
    while True:
        coeffs = [Fraction(rng.randint(0, 20)) for _ in verts]
        total = sum(coeffs)
        if total == 0:
            continue
        shrink = Fraction(rng.randint(1, 100), 100)
        point = tuple(
            shrink * sum(c * v[j] for c, v in zip(coeffs, verts)) / total
            for j in range(q.num_atoms)
        )
        packing = EdgePacking(point)
        if packing.total > 0:
            return packing


def random_linear_fleet(
    rng: random.Random, max_machines: int = 20, max_weight: int = 9, min_machines: int = 1
) -> MachineFleet:
    p = rng.randint(min_machines, max_machines)
    return MachineFleet.linear([rng.randint(1, max_weight) for _ in range(p)])


def grid_points(n: int, k: int):
    return itertools.product(range(n), repeat=k)
