"""Exact rational solving of tiny linear programs by vertex enumeration.

The LPs that show up here (covers and packings of query hypergraphs) have
at most a handful of variables and constraints, so we enumerate every basic
feasible solution instead of pivoting: pick n constraints, make them tight,
solve the square system over fractions, keep the solution if it satisfies
everything else. This is exponential in general and entirely fine at n <= 8,
and it buys exactness plus deterministic tie-breaking for free.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Sequence

Row = Sequence[Fraction]

LE = "le"
GE = "ge"


def solve_square(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Solve a square rational system by Gaussian elimination; None if singular."""
    n = len(rhs)
    a = [list(row) + [b] for row, b in zip(rows, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        inv = Fraction(1) / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def _satisfies(point: Sequence[Fraction], coeffs: Row, rhs: Fraction, sense: str) -> bool:
    value = sum(c * x for c, x in zip(coeffs, point))
    return value <= rhs if sense == LE else value >= rhs


def enumerate_vertices(
    num_vars: int,
    constraints: Iterable[tuple[Row, Fraction, str]],
) -> list[tuple[Fraction, ...]]:
    """All vertices of {x >= 0 : constraints hold}, sorted, duplicates removed.

    Each constraint is (coefficients, rhs, sense) with sense in {"le", "ge"}.
    Nonnegativity of every variable is implied and need not be passed in.
    """
    rows: list[tuple[Row, Fraction, str]] = list(constraints)
    for i in range(num_vars):
        unit = tuple(Fraction(int(j == i)) for j in range(num_vars))
        rows.append((unit, Fraction(0), GE))

    vertices: set[tuple[Fraction, ...]] = set()
    for tight in itertools.combinations(range(len(rows)), num_vars):
        system = [list(rows[i][0]) for i in tight]
        rhs = [rows[i][1] for i in tight]
        point = solve_square(system, rhs)
        if point is None:
            continue
        if any(x < 0 for x in point):
            continue
        if all(_satisfies(point, c, b, s) for c, b, s in rows):
            vertices.add(tuple(point))
    return sorted(vertices)


def select_optimum(
    vertices: Sequence[tuple[Fraction, ...]],
    objective: Row,
    maximize: bool,
) -> tuple[Fraction, ...]:
    """Optimal vertex for a rational linear objective, lexicographically
    smallest weight vector among ties."""
    if not vertices:
        raise ValueError("empty polytope")
    best: tuple[Fraction, ...] | None = None
    best_val: Fraction | None = None
    for v in vertices:
        val = sum(c * x for c, x in zip(objective, v))
        if best_val is None or (val > best_val if maximize else val < best_val):
            best, best_val = v, val
        elif val == best_val and v < best:
            best = v
    assert best is not None
    return best
