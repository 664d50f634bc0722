"""Full conjunctive queries as hypergraphs, plus their cover/packing LPs.

A query is a natural join of l relations over k variables, no projection,
no self-joins. Two exact rational LP solutions hang off it: the minimum
fractional vertex cover (drives upper bounds) and the maximum fractional
edge packing (drives lower bounds). Both are computed by enumerating basic
feasible solutions, so totals like 3/2 come out as exact fractions and the
LP-duality identity between the two holds with equality, not tolerance.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from fractions import Fraction

from . import ratlp

_ATOM_RE = re.compile(r"^\s*(\w+)\s*\(\s*([\w\s,]+?)\s*\)\s*$")


class QueryError(ValueError):
    """Malformed query definition."""


@dataclass(frozen=True)
class Atom:
    name: str
    variables: tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.variables)


@dataclass(frozen=True)
class Query:
    variables: tuple[str, ...]
    atoms: tuple[Atom, ...]

    def __post_init__(self) -> None:
        if not self.variables or not self.atoms:
            raise QueryError("a query needs at least one variable and one atom")
        if len(set(self.variables)) != len(self.variables):
            raise QueryError("duplicate variable in query")
        names = [a.name for a in self.atoms]
        if len(set(names)) != len(names):
            raise QueryError("self-joins are not supported (duplicate atom name)")
        declared = set(self.variables)
        for atom in self.atoms:
            if not atom.variables:
                raise QueryError(f"atom {atom.name} has no variables")
            if len(set(atom.variables)) != len(atom.variables):
                raise QueryError(f"atom {atom.name} repeats a variable")
            if not set(atom.variables) <= declared:
                raise QueryError(f"atom {atom.name} uses undeclared variables")

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def arities(self) -> tuple[int, ...]:
        return tuple(a.arity for a in self.atoms)

    def var_index(self, name: str) -> int:
        return self.variables.index(name)

    def atom_var_indices(self, atom: Atom) -> tuple[int, ...]:
        return tuple(self.var_index(v) for v in atom.variables)

    def atom_by_name(self, name: str) -> Atom:
        for atom in self.atoms:
            if atom.name == name:
                return atom
        raise KeyError(name)


def parse_query(text: str) -> Query:
    """Parse one atom per line, e.g. ``S1(x,z)``; '#' starts a comment.

    Variable order is the order of first appearance, atom order is line order.
    """
    atoms: list[Atom] = []
    variables: list[str] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _ATOM_RE.match(line)
        if m is None:
            raise QueryError(f"cannot parse atom: {raw!r}")
        name = m.group(1)
        vars_ = tuple(v.strip() for v in m.group(2).split(","))
        atoms.append(Atom(name, vars_))
        for v in vars_:
            if v not in variables:
                variables.append(v)
    return Query(tuple(variables), tuple(atoms))


@dataclass(frozen=True)
class VertexCover:
    """Per-variable weights v_i >= 0 with every atom covered to total >= 1."""

    weights: tuple[Fraction, ...]

    @property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def is_feasible(self, q: Query) -> bool:
        if len(self.weights) != q.num_variables or any(w < 0 for w in self.weights):
            return False
        for atom in q.atoms:
            if sum(self.weights[q.var_index(v)] for v in atom.variables) < 1:
                return False
        return True


@dataclass(frozen=True)
class EdgePacking:
    """Per-atom weights u_j >= 0 with every variable's incident total <= 1."""

    weights: tuple[Fraction, ...]

    @property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def is_feasible(self, q: Query) -> bool:
        if len(self.weights) != q.num_atoms or any(w < 0 for w in self.weights):
            return False
        for var in q.variables:
            incident = sum(
                w for w, atom in zip(self.weights, q.atoms) if var in atom.variables
            )
            if incident > 1:
                return False
        return True


def _incidence(q: Query) -> list[list[Fraction]]:
    # rows: atoms, cols: variables
    return [
        [Fraction(int(v in atom.variables)) for v in q.variables] for atom in q.atoms
    ]


@functools.lru_cache(maxsize=None)
def cover_polytope_vertices(q: Query) -> tuple[tuple[Fraction, ...], ...]:
    rows = _incidence(q)
    constraints = [(tuple(row), Fraction(1), ratlp.GE) for row in rows]
    return tuple(ratlp.enumerate_vertices(q.num_variables, constraints))


@functools.lru_cache(maxsize=None)
def packing_polytope_vertices(q: Query) -> tuple[tuple[Fraction, ...], ...]:
    rows = _incidence(q)
    columns = [
        tuple(rows[j][i] for j in range(q.num_atoms)) for i in range(q.num_variables)
    ]
    constraints = [(col, Fraction(1), ratlp.LE) for col in columns]
    return tuple(ratlp.enumerate_vertices(q.num_atoms, constraints))


def minimum_fractional_vertex_cover(q: Query) -> VertexCover:
    """Exact minimum-total fractional vertex cover (lex-smallest among ties)."""
    vertices = cover_polytope_vertices(q)
    ones = [Fraction(1)] * q.num_variables
    best = ratlp.select_optimum(vertices, ones, maximize=False)
    return VertexCover(best)


def maximum_fractional_edge_packing(q: Query) -> EdgePacking:
    """Exact maximum-total fractional edge packing (lex-smallest among ties)."""
    vertices = packing_polytope_vertices(q)
    ones = [Fraction(1)] * q.num_atoms
    best = ratlp.select_optimum(vertices, ones, maximize=True)
    return EdgePacking(best)
