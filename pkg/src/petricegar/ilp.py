"""Exact integer programming over transition counts.

The solver returns the Ω-smallest nonnegative integral solution, where Ω
orders vectors by their sum and breaks ties lexicographically in declared
transition order. Everything runs on Python integers and ``Fraction``.
"""

from __future__ import annotations

import heapq
import itertools
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Protocol

from . import simplex
from .net import Vector, incidence
from .problem import Mode, ReachabilityProblem

RELATIONS = ("=", ">=", "<=")


@dataclass(frozen=True)
class Row:
    coeffs: tuple[tuple[str, int], ...]
    relation: str
    rhs: int
    label: str = ""

    def __post_init__(self) -> None:
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        object.__setattr__(self, "coeffs", tuple((v, int(a)) for v, a in self.coeffs if a))

    @classmethod
    def of(cls, coeffs: Mapping[str, int], relation: str, rhs: int, label: str = "") -> Row:
        return cls(tuple(coeffs.items()), relation, int(rhs), label)

    def lhs(self, x: Mapping[str, int]) -> int:
        return sum(a * x.get(v, 0) for v, a in self.coeffs)

    def holds(self, x: Mapping[str, int]) -> bool:
        value = self.lhs(x)
        if self.relation == "=":
            return value == self.rhs
        if self.relation == ">=":
            return value >= self.rhs
        return value <= self.rhs


@dataclass(frozen=True)
class LinearSystem:
    """Rows over ``variables``; every variable is implicitly integral and >= 0.

    The objective is fixed: minimise the sum of all variables, ties broken by Ω.
    """

    variables: tuple[str, ...]
    rows: tuple[Row, ...] = ()

    def __post_init__(self) -> None:
        known = set(self.variables)
        for row in self.rows:
            for v, _ in row.coeffs:
                if v not in known:
                    raise ValueError(f"row {row.label or row} uses unknown variable {v}")

    def with_rows(self, rows: Iterable[Row]) -> LinearSystem:
        return LinearSystem(self.variables, self.rows + tuple(rows))

    def satisfied_by(self, x: Mapping[str, int]) -> bool:
        return all(x.get(v, 0) >= 0 for v in self.variables) and all(r.holds(x) for r in self.rows)

    def index_rows(self) -> list[simplex.IndexRow]:
        pos = {v: i for i, v in enumerate(self.variables)}
        out = []
        for row in self.rows:
            coeffs: dict[int, int] = {}
            for v, a in row.coeffs:
                coeffs[pos[v]] = coeffs.get(pos[v], 0) + a
            out.append((coeffs, row.relation, row.rhs))
        return out


@dataclass(frozen=True)
class SolveBudget:
    max_nodes: int = 100_000
    max_pivots: int = 1_000_000

    def __post_init__(self) -> None:
        if self.max_nodes < 1 or self.max_pivots < 1:
            raise ValueError("budget limits must be at least 1")


@dataclass(frozen=True)
class SolveOutcome:
    status: str  # "solution", "infeasible", "budget"
    solution: Vector | None = None
    nodes: int = 0
    pivots: int = 0

    @property
    def feasible(self) -> bool:
        return self.status == "solution"


class SolverBackend(Protocol):
    def __call__(self, system: LinearSystem, budget: SolveBudget) -> SolveOutcome: ...


def build_state_equation(problem: ReachabilityProblem) -> LinearSystem:
    net = problem.net
    matrix = incidence(net)
    relation = "=" if problem.mode is Mode.REACH else ">="
    rows = [
        Row.of(matrix.row(s), relation, problem.final[s] - problem.initial[s], label=s)
        for s in net.places
    ]
    rows += [Row.of({t: 1}, ">=", k, label=f"require_{t}") for t, k in problem.required]
    return LinearSystem(net.transitions, tuple(rows))


def omega_key(x: Mapping[str, int], order: Sequence[str]) -> tuple[int, tuple[int, ...]]:
    dense = tuple(x.get(t, 0) for t in order)
    return sum(dense), dense


def omega_compare(x: Mapping[str, int], y: Mapping[str, int], order: Sequence[str]) -> int:
    """-1, 0 or 1 as x is Ω-before, equal to, or after y."""
    kx, ky = omega_key(x, order), omega_key(y, order)
    return (kx > ky) - (kx < ky)


def gcd_feasibility_check(system: LinearSystem) -> bool:
    """False when the equality rows provably have no integral solution.

    Integer row reduction (unimodular, so the integral solution set is
    unchanged), then a divisibility test per reduced row. True means only
    "not refuted".
    """
    n = len(system.variables)
    pos = {v: i for i, v in enumerate(system.variables)}
    rows = []
    for row in system.rows:
        if row.relation != "=":
            continue
        dense = [0] * (n + 1)
        for v, a in row.coeffs:
            dense[pos[v]] += a
        dense[n] = row.rhs
        rows.append(dense)

    top = 0
    for col in range(n):
        while True:
            nz = [i for i in range(top, len(rows)) if rows[i][col]]
            if len(nz) <= 1:
                break
            piv = min(nz, key=lambda i: (abs(rows[i][col]), i))
            for i in nz:
                if i != piv:
                    q = rows[i][col] // rows[piv][col]
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[piv])]
        if nz:
            rows[top], rows[nz[0]] = rows[nz[0]], rows[top]
            top += 1

    for dense in rows:
        g = math.gcd(*dense[:n]) if n else 0
        if g == 0:
            if dense[n] != 0:
                return False
        elif dense[n] % g:
            return False
    return True


class _BudgetHit(Exception):
    pass


@dataclass
class _Counter:
    budget: SolveBudget
    nodes: int = 0
    pivots: int = 0

    def pivot(self) -> None:
        self.pivots += 1
        if self.pivots > self.budget.max_pivots:
            raise _BudgetHit

    def node(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise _BudgetHit


def _branch_and_bound(
    n: int,
    rows: list[simplex.IndexRow],
    cost: list[int],
    counter: _Counter,
    incumbent: list[int] | None = None,
) -> list[int] | None:
    """Minimise integral ``cost·x``; best-bound-first, returns a strict improvement on
    ``incumbent`` or ``incumbent`` itself."""
    best = None if incumbent is None else sum(c * v for c, v in zip(cost, incumbent))
    tie = itertools.count()
    heap: list = []

    def relax(lo: dict[int, int], hi: dict[int, int]) -> None:
        counter.node()
        extra = [({j: 1}, ">=", v) for j, v in lo.items()]
        extra += [({j: 1}, "<=", v) for j, v in hi.items()]
        res = simplex.minimize(n, rows + extra, cost, counter)
        if res.status != "optimal":
            return
        if best is not None and math.ceil(res.value) >= best:
            return
        heapq.heappush(heap, (res.value, next(tie), lo, hi, res.x))

    relax({}, {})
    while heap:
        bound, _, lo, hi, x = heapq.heappop(heap)
        if best is not None and math.ceil(bound) >= best:
            break
        j, frac = -1, 0
        for i, v in enumerate(x):
            f = v - math.floor(v)
            if f > frac:
                j, frac = i, f
        if j < 0:
            incumbent = [int(v) for v in x]
            best = int(bound)
            break  # best-first: nothing left on the heap can beat it
        floor = math.floor(x[j])
        if floor >= lo.get(j, 0):
            relax(lo, {**hi, j: floor})
        if j not in hi or floor + 1 <= hi[j]:
            relax({**lo, j: floor + 1}, hi)
    return incumbent


def solve_omega_min(system: LinearSystem, budget: SolveBudget = SolveBudget()) -> SolveOutcome:
    """Ω-minimal nonnegative integral solution of ``system``.

    Phase one minimises the sum; phase two fixes the sum and then minimises
    each variable in declared order.
    """
    counter = _Counter(budget)
    if not gcd_feasibility_check(system):
        return SolveOutcome("infeasible")
    n = len(system.variables)
    rows = system.index_rows()
    try:
        best = _branch_and_bound(n, rows, [1] * n, counter)
        if best is None:
            return SolveOutcome("infeasible", nodes=counter.nodes, pivots=counter.pivots)
        fixed = rows + [({j: 1 for j in range(n)}, "=", sum(best))]
        for j in range(n):
            if best[j]:
                cost = [0] * n
                cost[j] = 1
                best = _branch_and_bound(n, fixed, cost, counter, incumbent=best)
            fixed.append(({j: 1}, "=", best[j]))
    except _BudgetHit:
        return SolveOutcome("budget", nodes=counter.nodes, pivots=counter.pivots)
    solution = Vector.from_dense(system.variables, best)
    assert system.satisfied_by(solution), "solver produced a vector violating its system"
    return SolveOutcome("solution", solution, counter.nodes, counter.pivots)


def to_lp_text(system: LinearSystem) -> str:
    """Human-readable LP-style dump; not a stable format."""

    def term(a: int, v: str, first: bool) -> str:
        mag = "" if abs(a) == 1 else f"{abs(a)} "
        if first:
            return f"{'-' if a < 0 else ''}{mag}{v}"
        return f" {'-' if a < 0 else '+'} {mag}{v}"

    lines = ["min: " + " + ".join(system.variables) + ";"]
    for i, row in enumerate(system.rows):
        lhs = "".join(term(a, v, k == 0) for k, (v, a) in enumerate(row.coeffs)) or "0"
        lines.append(f"{row.label or f'r{i}'}: {lhs} {row.relation} {row.rhs};")
    lines.append("int " + ", ".join(system.variables) + ";")
    return "\n".join(lines) + "\n"
