"""Per-machine cost functions and fleets.

A cost function maps bits received to a cost, is zero at zero, strictly
increasing, and grows at most polynomially. Three shapes are supported:

* linear, ``g(x) = x / w`` with a positive integer weight,
* polynomial, ``g(x) = x**a / w``,
* tabulated, breakpoints with linear interpolation in between and
  constant-slope extrapolation beyond the last point.

The pseudo-inverse ``g*(L)`` is the largest integer number of bits whose
cost stays within the load budget L. Searches downstream lean on it being
the exact integer max, so the comparisons here are done in exact rational
arithmetic whenever the function shape allows it.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class CostModelError(ValueError):
    pass


class NonLinearFleetError(CostModelError):
    """Raised by operations that are only defined for linear fleets."""


def _integer_root(value: int, degree: int) -> int:
    """Largest x >= 0 with x**degree <= value."""
    if value < 0:
        raise ValueError("negative radicand")
    if degree == 1:
        return value
    if degree == 2:
        return math.isqrt(value)
    x = int(round(value ** (1.0 / degree)))
    while x > 0 and x**degree > value:
        x -= 1
    while (x + 1) ** degree <= value:
        x += 1
    return x


@dataclass(frozen=True)
class LinearCost:
    """g(x) = x / weight."""

    weight: int

    def __post_init__(self) -> None:
        if not isinstance(self.weight, int) or self.weight <= 0:
            raise CostModelError("linear weight must be a positive integer")

    def cost(self, bits: int) -> float:
        _check_bits(bits)
        return bits / self.weight

    def max_bits_within(self, load: float) -> int:
        if load <= 0:
            return 0
        return int(Fraction(load) * self.weight)


@dataclass(frozen=True)
class PolynomialCost:
    """g(x) = x**exponent / weight."""

    exponent: float
    weight: float

    def __post_init__(self) -> None:
        if self.exponent <= 0 or self.weight <= 0:
            raise CostModelError("polynomial exponent and weight must be positive")

    def cost(self, bits: int) -> float:
        _check_bits(bits)
        if bits == 0:
            return 0.0
        return bits**self.exponent / self.weight

    def max_bits_within(self, load: float) -> int:
        if load <= 0:
            return 0
        a = self.exponent
        if float(a).is_integer():
            # x**a <= L*w over the rationals, and x**a is an integer
            target = Fraction(load) * Fraction(self.weight)
            if target < 1:
                return 0
            return _integer_root(int(target), int(a))
        x = max(int((load * self.weight) ** (1.0 / a)), 0)
        while x > 0 and self.cost(x) > load:
            x -= 1
        while self.cost(x + 1) <= load:
            x += 1
        return x


@dataclass(frozen=True)
class TableCost:
    """Monotone breakpoints (bits, cost), linearly interpolated.

    The first breakpoint must be (0, 0) and both coordinates must be strictly
    increasing. ``growth_exponent`` is the declared polynomial growth cap; it
    is verified by checking every pair of breakpoints at bits >= 1.
    """

    points: tuple[tuple[int, Fraction], ...]
    growth_exponent: float = 2.0

    def __post_init__(self) -> None:
        pts = tuple((int(b), Fraction(c)) for b, c in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise CostModelError("table needs at least two breakpoints")
        if pts[0] != (0, Fraction(0)):
            raise CostModelError("table must start at (0, 0)")
        for (b0, c0), (b1, c1) in zip(pts, pts[1:]):
            if b1 <= b0 or c1 <= c0:
                raise CostModelError("table breakpoints must be strictly increasing")
        if self.growth_exponent <= 1:
            raise CostModelError("growth exponent must exceed 1")
        a = self.growth_exponent
        for i, (bs, cs) in enumerate(pts):
            if bs < 1:
                continue
            for bt, ct in pts[i + 1 :]:
                if float(ct) > (bt / bs) ** a * float(cs) * (1 + 1e-9):
                    raise CostModelError(
                        f"growth cap a={a} violated between bits {bs} and {bt}"
                    )

    def _cost_fraction(self, bits: int) -> Fraction:
        xs = [b for b, _ in self.points]
        if bits <= xs[-1]:
            i = bisect.bisect_right(xs, bits) - 1
            if xs[i] == bits:
                return self.points[i][1]
            (b0, c0), (b1, c1) = self.points[i], self.points[i + 1]
            return c0 + (c1 - c0) * (bits - b0) / (b1 - b0)
        (b0, c0), (b1, c1) = self.points[-2], self.points[-1]
        slope = (c1 - c0) / (b1 - b0)
        return c1 + slope * (bits - b1)

    def cost(self, bits: int) -> float:
        _check_bits(bits)
        return float(self._cost_fraction(bits))

    def max_bits_within(self, load: float) -> int:
        budget = Fraction(load) if load > 0 else Fraction(0)
        if budget <= 0 or self._cost_fraction(1) > budget:
            return 0
        (b0, c0), (b1, c1) = self.points[-2], self.points[-1]
        slope = (c1 - c0) / (b1 - b0)
        hi = self.points[-1][0]
        if budget > c1:
            hi += int((budget - c1) / slope) + 1
        lo = 1  # known feasible
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._cost_fraction(mid) <= budget:
                lo = mid
            else:
                hi = mid - 1
        return lo


CostFunction = Union[LinearCost, PolynomialCost, TableCost]


def _check_bits(bits: int) -> None:
    if bits < 0:
        raise CostModelError("bit counts cannot be negative")


def evaluate_cost(f: CostFunction, bits: int) -> float:
    return f.cost(bits)


def pseudo_inverse(f: CostFunction, load: float) -> int:
    """Largest integer x with f(x) <= load; 0 when even one bit is too costly."""
    if load < 0:
        raise CostModelError("load budgets cannot be negative")
    return f.max_bits_within(load)


@dataclass(frozen=True)
class Machine:
    id: int
    cost: CostFunction


@dataclass(frozen=True)
class MachineFleet:
    machines: tuple[Machine, ...]

    def __post_init__(self) -> None:
        if not self.machines:
            raise CostModelError("a fleet needs at least one machine")
        ids = [m.id for m in self.machines]
        if ids != list(range(1, len(ids) + 1)):
            raise CostModelError("machine ids must be 1..p in order")

    @classmethod
    def linear(cls, weights) -> "MachineFleet":
        return cls(
            tuple(Machine(i + 1, LinearCost(int(w))) for i, w in enumerate(weights))
        )

    def __len__(self) -> int:
        return len(self.machines)

    def __iter__(self):
        return iter(self.machines)

    @property
    def is_linear(self) -> bool:
        return all(isinstance(m.cost, LinearCost) for m in self.machines)

    def linear_weights(self) -> tuple[int, ...]:
        if not self.is_linear:
            raise NonLinearFleetError("operation requires an all-linear fleet")
        return tuple(m.cost.weight for m in self.machines)


def lp_norm(fleet: MachineFleet, exponent) -> float:
    """(sum of w**exponent) ** (1/exponent) over a linear fleet's weights."""
    e = float(exponent)
    if e <= 0:
        raise CostModelError("norm exponent must be positive")
    weights = fleet.linear_weights()
    return sum(float(w) ** e for w in weights) ** (1.0 / e)
