"""Seeded generators for the two input families, plus the output-size formula.

Matching databases are sparse: per relation, every attribute column is an
injection into the domain, so a domain value occurs at most once per column.
Dense databases hold a fixed fraction theta of all possible tuples, sampled
without replacement (or independently per tuple in bernoulli mode, which is
what the closed-form expected output size assumes exactly).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .bounds import InstanceSchema
from .query import Query

Relation = tuple[tuple[int, ...], ...]


class DataGenError(ValueError):
    pass


@dataclass(frozen=True)
class MatchingSpec:
    n: int
    cardinalities: tuple[int, ...]
    seed: int
    theta: float = 0.5  # cap on m/n for unary relations

    def __post_init__(self) -> None:
        if not 0 < self.theta < 1:
            raise DataGenError("theta must lie in (0, 1)")


@dataclass(frozen=True)
class DenseSpec:
    n: int
    theta: float
    seed: int
    bernoulli: bool = False

    def __post_init__(self) -> None:
        if not 0 < self.theta < 1:
            raise DataGenError("theta must lie in (0, 1)")


@dataclass(frozen=True)
class DatabaseInstance:
    kind: str  # "matching" | "dense"
    n: int
    seed: int
    relations: Mapping[str, Relation]  # atom name -> sorted tuples

    def cardinalities(self, q: Query) -> tuple[int, ...]:
        return tuple(len(self.relations[a.name]) for a in q.atoms)

    def schema(self, q: Query) -> InstanceSchema:
        return InstanceSchema.of(q, self.n, self.cardinalities(q))


def _relation_rng(seed: int, name: str) -> random.Random:
    return random.Random(f"{seed}:{name}")


def gen_matching(q: Query, spec: MatchingSpec) -> DatabaseInstance:
    """Uniform matching database: each column an independent random injection."""
    if len(spec.cardinalities) != q.num_atoms:
        raise DataGenError("one cardinality per atom required")
    relations = {}
    for atom, m in zip(q.atoms, spec.cardinalities):
        if not 0 <= m <= spec.n:
            raise DataGenError(f"matching cardinality {m} outside [0, n]")
        if atom.arity == 1 and m / spec.n > spec.theta:
            raise DataGenError(
                f"unary atom {atom.name} needs m/n <= theta={spec.theta}"
            )
        rng = _relation_rng(spec.seed, atom.name)
        columns = [rng.sample(range(spec.n), m) for _ in range(atom.arity)]
        relations[atom.name] = tuple(sorted(zip(*columns))) if m else ()
    return DatabaseInstance("matching", spec.n, spec.seed, relations)


def _decode(index: int, n: int, arity: int) -> tuple[int, ...]:
    out = []
    for _ in range(arity):
        out.append(index % n)
        index //= n
    return tuple(reversed(out))


def gen_dense(q: Query, spec: DenseSpec) -> DatabaseInstance:
    """Theta-dense database: floor(theta * n**r) distinct tuples per relation."""
    relations = {}
    for atom in q.atoms:
        cells = spec.n**atom.arity
        rng = _relation_rng(spec.seed, atom.name)
        if spec.bernoulli:
            chosen = [i for i in range(cells) if rng.random() < spec.theta]
        else:
            count = int(Fraction(spec.theta) * cells)
            chosen = rng.sample(range(cells), count)
        relations[atom.name] = tuple(
            sorted(_decode(i, spec.n, atom.arity) for i in chosen)
        )
    return DatabaseInstance("dense", spec.n, spec.seed, relations)


def expected_output_size(q: Query, n: int, cardinalities: Sequence[float]) -> float:
    """Expected join size (prod_j m_j) * n**(k - sum_j r_j) under independent
    uniform tuple presence."""
    if len(cardinalities) != q.num_atoms:
        raise DataGenError("one cardinality per atom required")
    return math.prod(cardinalities) * float(n) ** (
        q.num_variables - sum(q.arities)
    )
