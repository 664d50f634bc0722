"""Positioning hyperrectangles so they tile the output grid.

The procedure, given boxes whose shapes nest (heavier machine's box at
least as large in every dimension):

1. round every side up to the nearest power of two (a power of two stays),
2. bucket identical shapes and order buckets by volume,
3. cascade: merge as many boxes as possible from each bucket into the shape
   of the next bucket, stacking dimension by dimension,
4. pairwise-merge the top bucket along its smallest dimension (largest index
   wins a tie) until one block R remains; an odd box per pass is set aside,
5. stretch R by per-dimension factors f_i = max(n / |R_i|, 1) so it covers
   the whole grid.

Boxes set aside at any step are unused: those machines receive no data.
All coordinates are dyadic rationals (sums of powers of two times powers of
two), which doubles represent exactly, so box edges meet without gaps and
grid membership needs no tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .partition import Hyperrectangle


class PackingError(ValueError):
    pass


class PlacementInconsistencyError(RuntimeError):
    """A grid point fell into zero or several boxes. Must never happen."""


def round_up_pow2(x: float) -> float:
    """Smallest power of two >= x (x itself when x is already one)."""
    if x <= 0:
        raise PackingError("sides must be positive before rounding")
    mant, exp = math.frexp(x)  # x = mant * 2**exp with mant in [0.5, 1)
    if mant == 0.5:
        return math.ldexp(1.0, exp - 1)
    return math.ldexp(1.0, exp)


def round_sides(rects: Iterable[Hyperrectangle]) -> list[Hyperrectangle]:
    """Round every side up to a power of two; zero-sided rects are dropped
    (their machines end up unused)."""
    out = []
    for r in rects:
        if min(r.sides) > 0:
            out.append(
                Hyperrectangle(r.machine_id, tuple(round_up_pow2(s) for s in r.sides))
            )
    return out


@dataclass(frozen=True)
class _Node:
    sides: tuple[float, ...]
    machine_id: int | None = None
    stack_dim: int | None = None
    children: tuple["_Node", ...] = ()

    @property
    def volume(self) -> float:
        return math.prod(self.sides)


@dataclass(frozen=True)
class PlacedBox:
    """One machine's slice of the cover; `used` means it sits inside R."""

    machine_id: int
    used: bool
    lo: tuple[float, ...] = ()
    hi: tuple[float, ...] = ()
    grid_lo: tuple[int, ...] = ()
    grid_hi: tuple[int, ...] = ()
    sides: tuple[float, ...] = ()  # scaled sides, the load-accounting box

    @property
    def grid_empty(self) -> bool:
        return not self.used or any(l >= h for l, h in zip(self.grid_lo, self.grid_hi))

    def grid_contains(self, point: Sequence[int]) -> bool:
        if self.grid_empty:
            return False
        return all(
            l <= x < h for x, l, h in zip(point, self.grid_lo, self.grid_hi)
        )


@dataclass(frozen=True)
class Placement:
    n: int
    k: int
    scale: tuple[float, ...]
    boxes: tuple[PlacedBox, ...]  # ordered by machine id
    cover_volume: float  # volume of R before scaling
    trace: tuple[str, ...]
    _root: _Node = field(repr=False)

    def box(self, machine_id: int) -> PlacedBox:
        for b in self.boxes:
            if b.machine_id == machine_id:
                return b
        raise KeyError(machine_id)

    @property
    def used_machine_ids(self) -> tuple[int, ...]:
        return tuple(b.machine_id for b in self.boxes if b.used)

    def locate(self, point: Sequence[int]) -> int:
        """Machine owning a grid point, by merge-tree descent."""
        if len(point) != self.k or any(not 0 <= x < self.n for x in point):
            raise ValueError(f"point {point} outside the grid")
        node = self._root
        origin = [0.0] * self.k
        while node.machine_id is None:
            d = node.stack_dim
            span = node.children[0].sides[d] * self.scale[d]
            idx = int((point[d] - origin[d]) // span)
            if not 0 <= idx < len(node.children):
                raise PlacementInconsistencyError(f"no box contains {point}")
            origin[d] += idx * span
            node = node.children[idx]
        for i in range(self.k):
            if not origin[i] <= point[i] < origin[i] + node.sides[i] * self.scale[i]:
                raise PlacementInconsistencyError(f"descent missed {point}")
        return node.machine_id

    def owners_by_scan(self, point: Sequence[int]) -> list[int]:
        """Machines whose grid box contains the point (independent of locate)."""
        return [b.machine_id for b in self.boxes if b.grid_contains(point)]

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "n": self.n,
            "k": self.k,
            "scale": list(self.scale),
            "cover_volume": self.cover_volume,
            "machines": [
                {
                    "machine": b.machine_id,
                    "used": b.used,
                    "lo": list(b.lo),
                    "hi": list(b.hi),
                    "grid_lo": list(b.grid_lo),
                    "grid_hi": list(b.grid_hi),
                    "sides": list(b.sides),
                }
                for b in self.boxes
            ],
        }


def _bucketize(leaves: list[_Node]) -> list[tuple[tuple[float, ...], list[_Node]]]:
    buckets: dict[tuple[float, ...], list[_Node]] = {}
    for leaf in leaves:
        buckets.setdefault(leaf.sides, []).append(leaf)
    ordered = sorted(buckets.items(), key=lambda kv: math.prod(kv[0]))
    for (small, _), (big, _) in zip(ordered, ordered[1:]):
        if not all(s <= b for s, b in zip(small, big)):
            raise PackingError(
                f"shapes {small} and {big} do not nest; "
                "input boxes must grow with machine weight in every dimension"
            )
    return ordered


def _stack_chunk(nodes: list[_Node], factors: list[int]) -> _Node:
    cur = nodes
    for dim, f in enumerate(factors):
        if f == 1:
            continue
        nxt = []
        for i in range(0, len(cur), f):
            group = cur[i : i + f]
            sides = list(group[0].sides)
            sides[dim] *= f
            nxt.append(_Node(tuple(sides), stack_dim=dim, children=tuple(group)))
        cur = nxt
    if len(cur) != 1:
        raise PackingError("stacking factors do not multiply to the chunk size")
    return cur[0]


def _min_dim_last(sides: tuple[float, ...]) -> int:
    smallest = min(sides)
    return max(i for i, s in enumerate(sides) if s == smallest)


def pack(rects: Sequence[Hyperrectangle], n: int, k: int | None = None) -> Placement:
    """Tile [0, n)^k with the given boxes, enlarging them as little as the
    power-of-two merge process requires. Machines that do not fit are unused."""
    rects = sorted(rects, key=lambda r: r.machine_id)
    ids = [r.machine_id for r in rects]
    if len(set(ids)) != len(ids):
        raise PackingError("duplicate machine ids")
    if not rects:
        raise PackingError("nothing to place")
    if k is None:
        k = len(rects[0].sides)
    if any(len(r.sides) != k for r in rects):
        raise PackingError("all boxes must have the same dimensionality")
    if any(s > n * (1 + 1e-9) for r in rects for s in r.sides):
        raise PackingError("sides must not exceed the domain size")

    trace: list[str] = []
    rounded = round_sides(rects)
    leaves = [_Node(r.sides, machine_id=r.machine_id) for r in rounded]
    if not leaves:
        raise PackingError("every box has a zero side; nothing can be placed")

    unused_nodes: list[_Node] = []
    ordered = _bucketize(leaves)
    for shape, items in ordered:
        trace.append(f"bucket {shape}: {len(items)} box(es)")

    # cascade small buckets upward
    for t in range(len(ordered) - 1):
        shape, items = ordered[t]
        next_shape, next_items = ordered[t + 1]
        factors = [int(b / s) for s, b in zip(shape, next_shape)]
        group = math.prod(factors)
        built = len(items) // group
        for g in range(built):
            next_items.append(_stack_chunk(items[g * group : (g + 1) * group], factors))
        leftover = items[built * group :]
        unused_nodes.extend(leftover)
        if items:
            trace.append(
                f"merge {group} x {shape} -> {next_shape}: "
                f"{built} built, {len(leftover)} left over"
            )

    # pairwise-merge the top bucket down to a single block
    items = ordered[-1][1]
    while len(items) > 1:
        d = _min_dim_last(items[0].sides)
        if len(items) % 2:
            unused_nodes.append(items.pop())
        merged = []
        for i in range(0, len(items), 2):
            pair = items[i : i + 2]
            sides = list(pair[0].sides)
            sides[d] *= 2
            merged.append(_Node(tuple(sides), stack_dim=d, children=tuple(pair)))
        trace.append(
            f"pairwise merge along dim {d}: {len(items)} -> {len(merged)} "
            f"block(s) of {merged[0].sides}"
        )
        items = merged

    root = items[0]
    if not root.volume > n**k / 2:
        raise PackingError(
            f"final block volume {root.volume} is not more than half the grid"
        )
    scale = tuple(max(n / s, 1.0) for s in root.sides)
    trace.append(f"final block {root.sides}, volume {root.volume}, scale {scale}")

    offsets: dict[int, tuple[tuple[float, ...], tuple[float, ...]]] = {}

    def walk(node: _Node, origin: tuple[float, ...]) -> None:
        if node.machine_id is not None:
            if node.machine_id in offsets:
                raise PlacementInconsistencyError("machine placed twice")
            offsets[node.machine_id] = (origin, node.sides)
            return
        d = node.stack_dim
        pos = list(origin)
        for child in node.children:
            walk(child, tuple(pos))
            pos[d] += child.sides[d]

    walk(root, (0.0,) * k)

    boxes = []
    for r in rects:
        if r.machine_id in offsets:
            origin, sides = offsets[r.machine_id]
            lo = tuple(o * f for o, f in zip(origin, scale))
            hi = tuple((o + s) * f for o, s, f in zip(origin, sides, scale))
            boxes.append(
                PlacedBox(
                    machine_id=r.machine_id,
                    used=True,
                    lo=lo,
                    hi=hi,
                    grid_lo=tuple(min(math.ceil(x), n) for x in lo),
                    grid_hi=tuple(min(math.ceil(x), n) for x in hi),
                    sides=tuple(s * f for s, f in zip(sides, scale)),
                )
            )
        else:
            boxes.append(PlacedBox(machine_id=r.machine_id, used=False))
    return Placement(
        n=n,
        k=k,
        scale=scale,
        boxes=tuple(boxes),
        cover_volume=root.volume,
        trace=tuple(trace),
        _root=root,
    )


def locate(placement: Placement, point: Sequence[int]) -> int:
    return placement.locate(point)
