"""Constraint and partial-solution types shared by the refinement loop and the search."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .ilp import Row
from .net import Vector


@dataclass(frozen=True)
class Jump:
    """``transition < bound``; steers the solver to an incomparable solution."""

    transition: str
    bound: int

    def __post_init__(self) -> None:
        if self.bound < 1:
            raise ValueError(f"jump constraint {self.transition} < {self.bound} is unsatisfiable")

    def to_row(self) -> Row:
        return Row.of({self.transition: 1}, "<=", self.bound - 1, label=f"jump_{self.transition}")

    def __str__(self) -> str:
        return f"{self.transition} < {self.bound}"


@dataclass(frozen=True)
class Increment:
    """``sum(coeffs[t] * t) >= bound``; forces extra token production."""

    coeffs: tuple[tuple[str, int], ...]
    bound: int

    def __post_init__(self) -> None:
        if self.bound < 0:
            raise ValueError("increment bound must be nonnegative")
        object.__setattr__(self, "coeffs", tuple(sorted((t, a) for t, a in self.coeffs if a)))

    @classmethod
    def of(cls, coeffs: dict[str, int], bound: int) -> Increment:
        return cls(tuple(coeffs.items()), bound)

    def to_row(self) -> Row:
        return Row(self.coeffs, ">=", self.bound, label="incr")

    def __str__(self) -> str:
        lhs = " + ".join(t if a == 1 else f"{a}*{t}" for t, a in self.coeffs)
        return f"{lhs} >= {self.bound}"


Constraint = Union[Jump, Increment]


def extend(family: tuple[Constraint, ...], new: tuple[Constraint, ...] | list[Constraint]) -> tuple[Constraint, ...]:
    """Append constraints not already present, keeping order."""
    seen = set(family)
    out = list(family)
    for c in new:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return tuple(out)


@dataclass(frozen=True)
class PartialSolution:
    """(Γ, x, σ, r): constraints, their Ω-minimal solution, a fireable prefix and the remainder."""

    constraints: tuple[Constraint, ...]
    x: Vector
    sigma: tuple[str, ...]
    r: Vector

    @property
    def full(self) -> bool:
        return not self.r

    @property
    def has_jumps(self) -> bool:
        return any(isinstance(c, Jump) for c in self.constraints)


@dataclass(frozen=True)
class SccTriple:
    """A source component of the dependency graph: starved places, the
    remainder transitions inside the component, and dependent ones outside."""

    places: frozenset[str]
    transitions: frozenset[str]
    dependents: frozenset[str]
