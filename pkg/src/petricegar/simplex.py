"""Exact two-phase primal simplex over ``fractions.Fraction``.

Bland's rule (lowest index enters, lowest basic index leaves on ratio ties)
keeps it cycle-free. Only what branch-and-bound needs: minimise ``cost·x``
subject to ``x >= 0`` and rows of the form ``a·x (=|<=|>=) b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Protocol, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class PivotCounter(Protocol):
    def pivot(self) -> None: ...


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: list[Fraction] | None = None
    value: Fraction | None = None


IndexRow = tuple[dict[int, int], str, int]


def _pivot(T: list[list[Fraction]], obj: list[Fraction], basis: list[int], r: int, c: int) -> None:
    prow = T[r]
    p = prow[c]
    if p != ONE:
        prow = [v / p for v in prow]
        T[r] = prow
    nz = [j for j, v in enumerate(prow) if v]
    for i, row in enumerate(T):
        if i != r:
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
    f = obj[c]
    if f:
        for j in nz:
            obj[j] -= f * prow[j]
    basis[r] = c


def _iterate(T, obj, basis, allowed: Sequence[int], counter: PivotCounter) -> str:
    while True:
        enter = -1
        for j in allowed:
            if obj[j] < 0:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave = -1
        best = None
        for i, row in enumerate(T):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave < 0:
            return "unbounded"
        counter.pivot()
        _pivot(T, obj, basis, leave, enter)


def minimize(n: int, rows: Sequence[IndexRow], cost: Sequence[int], counter: PivotCounter) -> LPResult:
    """Minimise ``cost·x`` over ``x in Q^n, x >= 0`` subject to ``rows``."""
    norm = []
    n_slack = n_art = 0
    for coeffs, rel, rhs in rows:
        if rhs < 0:
            coeffs = {j: -a for j, a in coeffs.items()}
            rhs = -rhs
            rel = {"<=": ">=", ">=": "<="}.get(rel, rel)
        if not any(coeffs.values()):
            ok = (rel == "=" and rhs == 0) or (rel == "<=" and rhs >= 0) or (rel == ">=" and rhs <= 0)
            if not ok:
                return LPResult("infeasible")
            continue
        norm.append((coeffs, rel, rhs))
        n_slack += rel != "="
        n_art += rel != "<="

    width = n + n_slack + n_art
    art_start = n + n_slack
    T: list[list[Fraction]] = []
    basis: list[int] = []
    slack = n
    art = art_start
    for coeffs, rel, rhs in norm:
        row = [ZERO] * (width + 1)
        for j, a in coeffs.items():
            row[j] = Fraction(a)
        row[-1] = Fraction(rhs)
        if rel == "<=":
            row[slack] = ONE
            basis.append(slack)
            slack += 1
        else:
            if rel == ">=":
                row[slack] = -ONE
                slack += 1
            row[art] = ONE
            basis.append(art)
            art += 1
        T.append(row)

    if n_art:
        obj = [ZERO] * (width + 1)
        for j in range(art_start, width):
            obj[j] = ONE
        for i, b in enumerate(basis):
            if b >= art_start:
                obj = [o - v for o, v in zip(obj, T[i])]
        _iterate(T, obj, basis, range(width), counter)
        if obj[-1] != 0:
            return LPResult("infeasible")
        # drive zero-valued artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(T):
            if basis[i] >= art_start:
                col = next((j for j in range(art_start) if T[i][j] != 0), -1)
                if col < 0:
                    del T[i]
                    del basis[i]
                    continue
                counter.pivot()
                _pivot(T, [ZERO] * (width + 1), basis, i, col)
            i += 1

    obj = [ZERO] * (width + 1)
    for j, c in enumerate(cost):
        obj[j] = Fraction(c)
    for i, b in enumerate(basis):
        cb = obj[b]
        if cb:
            obj = [o - cb * v for o, v in zip(obj, T[i])]
    status = _iterate(T, obj, basis, range(art_start), counter)
    if status != "optimal":
        return LPResult(status)
    x = [ZERO] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = T[i][-1]
    return LPResult("optimal", x, -obj[-1])
