"""Naive ground truth for cross-checking: explicit-state BFS and brute-force
enumeration of integral solutions. Deliberately free of any reduction."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .cegar import Verdict
from .ilp import LinearSystem, omega_key
from .net import Vector
from .problem import Mode, ReachabilityProblem


@dataclass(frozen=True)
class OracleBudget:
    max_markings: int = 200_000
    max_sum: int = 6

    def __post_init__(self) -> None:
        if self.max_markings < 1 or self.max_sum < 1:
            raise ValueError("oracle limits must be at least 1")


@dataclass(frozen=True)
class OracleOutcome:
    verdict: Verdict
    witness: tuple[str, ...] | None = None
    explored: int = 0


def bfs_reach(problem: ReachabilityProblem, budget: OracleBudget = OracleBudget()) -> OracleOutcome:
    """Breadth-first search over markings, paired with per-transition counters
    capped at the required minimum when the problem has requirements."""
    net = problem.net
    places, transitions = net.places, net.transitions
    pre, effect = net.pre, net.effect
    required = [(net.transition_index[t], k) for t, k in problem.required]
    slot = {t: i for i, (t, _) in enumerate(required)}
    target = problem.final.dense(places)
    cover = problem.mode is Mode.COVER

    def goal(state) -> bool:
        m, counters = state
        if any(c < k for c, (_, k) in zip(counters, required)):
            return False
        if cover:
            return all(a >= b for a, b in zip(m, target))
        return m == target

    start = (problem.initial.dense(places), tuple(0 for _ in required))
    parent: dict = {start: None}
    frontier = deque([start])
    while frontier:
        state = frontier.popleft()
        if goal(state):
            path = []
            while parent[state] is not None:
                state, t = parent[state]
                path.append(transitions[t])
            return OracleOutcome(Verdict.REACHABLE, tuple(reversed(path)), len(parent))
        m, counters = state
        for t in range(len(transitions)):
            if all(m[s] >= w for s, w in pre[t]):
                nm = list(m)
                for s, d in effect[t]:
                    nm[s] += d
                nc = counters
                if t in slot:
                    i = slot[t]
                    nc = list(counters)
                    nc[i] = min(nc[i] + 1, required[i][1])
                    nc = tuple(nc)
                nxt = (tuple(nm), nc)
                if nxt not in parent:
                    if len(parent) >= budget.max_markings:
                        return OracleOutcome(Verdict.INCONCLUSIVE, None, len(parent))
                    parent[nxt] = (state, t)
                    frontier.append(nxt)
    return OracleOutcome(Verdict.UNREACHABLE, None, len(parent))


def _compositions(n: int, total: int):
    """All length-n tuples of naturals summing to exactly ``total``."""
    if n == 0:
        if total == 0:
            yield ()
        return
    for bars in itertools.combinations(range(total + n - 1), n - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(total + n - 2 - prev)
        yield tuple(parts)


def enumerate_solutions(system: LinearSystem, sum_bound: int) -> list[Vector]:
    """Every integral solution with Σx <= sum_bound, in Ω order."""
    variables = system.variables
    found = []
    for total in range(sum_bound + 1):
        for parts in _compositions(len(variables), total):
            x = dict(zip(variables, parts))
            if all(row.holds(x) for row in system.rows):
                found.append(Vector(x))
    found.sort(key=lambda v: omega_key(v, variables))
    return found
