"""Depth-first search for firing sequences whose Parikh image stays below a solution vector.

Each transition ``t`` may occur at most ``y(t)`` times on a path. A path that
uses up ``y`` exactly is a full realization; a path that cannot be extended is
a leaf and becomes a new partial solution for the refinement loop.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from .constraints import PartialSolution
from .net import PetriNet, Vector

log = logging.getLogger(__name__)

DEFAULT_MAX_NODES = 1_000_000


def _enabled(pre, m: Sequence[int], t: int) -> bool:
    for s, w in pre[t]:
        if m[s] < w:
            return False
    return True


def _stubborn(net: PetriNet, m: Sequence[int], rem: Sequence[int], support: list[int], enabled: set[int]) -> set[int]:
    pre, consumers, producers = net.pre, net.consumers, net.producers
    closure: set[int] = set()

    def close(seed: int) -> None:
        closure.add(seed)
        work = [seed]
        while work:
            t = work.pop()
            if t in enabled:
                # conflict rule: everything that competes for an input place of t
                for s, _ in pre[t]:
                    for u in consumers[s]:
                        if rem[u] and u not in closure:
                            closure.add(u)
                            work.append(u)
            else:
                scapegoat = next(s for s, w in pre[t] if m[s] < w)
                for u in producers[scapegoat]:
                    if rem[u] and u not in closure:
                        closure.add(u)
                        work.append(u)

    close(support[0])
    if enabled and not (closure & enabled):
        # closure is dead for good; reseed so leaves stay maximal
        close(min(enabled))
    return closure


def stubborn_set(net: PetriNet, marking: Mapping[str, int], remaining: Mapping[str, int]) -> frozenset[str]:
    m = Vector(marking).dense(net.places)
    rem = Vector(remaining).dense(net.transitions)
    support = [t for t, k in enumerate(rem) if k]
    if not support:
        raise ValueError("stubborn set of an empty remainder")
    enabled = {t for t in support if _enabled(net.pre, m, t)}
    return frozenset(net.transitions[t] for t in _stubborn(net, m, rem, support, enabled))


@dataclass
class RealizeResult:
    full: tuple[str, ...] | None
    leaves: list[PartialSolution] = field(default_factory=list)
    pruned: list[PartialSolution] = field(default_factory=list)
    nodes: int = 0
    incomplete: bool = False


def realize(
    net: PetriNet,
    m: Mapping[str, int],
    y: Mapping[str, int],
    parent: PartialSolution | None = None,
    constraints: tuple = (),
    *,
    stubborn: bool = True,
    subtree_cut: bool = True,
    prune: bool = True,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> RealizeResult:
    """Search the firing tree of ``y`` from ``m``.

    Returns at the first full realization. Otherwise every leaf becomes a
    partial solution ``(constraints, y, σ', y - ℘(σ'))``; when ``parent`` is
    given and ``prune`` is on, leaves that ``check_prune`` rejects are moved
    to ``pruned``. ``incomplete`` is set when ``max_nodes`` cut the search.
    """
    transitions = net.transitions
    pre, effect = net.pre, net.effect
    y_vec = Vector(y)
    m0 = Vector(m).dense(net.places)
    rem0 = y_vec.dense(transitions)

    def candidates(mk: Sequence[int], rem: Sequence[int]) -> list[int]:
        support = [t for t, k in enumerate(rem) if k]
        if not support:
            return []
        enabled = [t for t in support if _enabled(pre, mk, t)]
        if not enabled or not stubborn:
            return enabled
        keep = _stubborn(net, mk, rem, support, set(enabled))
        return [t for t in enabled if t in keep]

    result = RealizeResult(full=None, nodes=1)
    raw_leaves: list[tuple[tuple[str, ...], tuple[int, ...]]] = []
    if not any(rem0):
        result.full = ()
        return result
    visited = {(m0, rem0)} if subtree_cut else None
    path: list[int] = []
    root_cands = candidates(m0, rem0)
    if not root_cands:
        raw_leaves.append(((), rem0))
    frames = [[m0, rem0, sum(rem0), root_cands, 0]] if root_cands else []

    while frames:
        frame = frames[-1]
        mk, rem, left, cands, i = frame
        if i >= len(cands):
            frames.pop()
            if path:
                path.pop()
            continue
        frame[4] = i + 1
        t = cands[i]
        nm = list(mk)
        for s, d in effect[t]:
            nm[s] += d
        nm = tuple(nm)
        nr = list(rem)
        nr[t] -= 1
        nr = tuple(nr)
        if visited is not None:
            key = (nm, nr)
            if key in visited:
                continue
            visited.add(key)
        result.nodes += 1
        if result.nodes > max_nodes:
            result.incomplete = True
            log.debug("realize: node budget %d exhausted", max_nodes)
            break
        path.append(t)
        if left == 1:
            result.full = tuple(transitions[k] for k in path)
            return result
        nc = candidates(nm, nr)
        if not nc:
            raw_leaves.append((tuple(transitions[k] for k in path), nr))
            path.pop()
            continue
        frames.append([nm, nr, left - 1, nc, 0])

    for seq, rem in raw_leaves:
        leaf = PartialSolution(tuple(constraints), y_vec, seq, Vector.from_dense(transitions, rem))
        if parent is not None and prune and check_prune(net, m, parent, leaf):
            result.pruned.append(leaf)
        else:
            result.leaves.append(leaf)
    return result


def missing_tokens(net: PetriNet, m: Sequence[int], t: int) -> int:
    return sum(max(0, w - m[s]) for s, w in net.pre[t])


def progress_profile(
    net: PetriNet, m: Mapping[str, int], sigma: Sequence[str], r: Mapping[str, int]
) -> dict[str, int]:
    """For each remainder transition, the fewest tokens it ever lacked along σ (m and the end included)."""
    ts = [net.transition_index[t] for t, k in r.items() if k]
    current = list(Vector(m).dense(net.places))
    best = {t: missing_tokens(net, current, t) for t in ts}
    for name in sigma:
        t = net.transition_index[name]
        for s, d in net.effect[t]:
            current[s] += d
        for u in ts:
            best[u] = min(best[u], missing_tokens(net, current, u))
    return {net.transitions[t]: v for t, v in best.items()}


def check_prune(net: PetriNet, m: Mapping[str, int], parent: PartialSolution, leaf: PartialSolution) -> bool:
    """True if ``leaf`` cannot lead to a new full solution and should be dropped.

    Assumes ``leaf.x = parent.x + y`` for a T-invariant ``y`` introduced by one
    refinement. Drops the leaf when it fired nothing beyond the parent's prefix,
    or when it fired exactly the added invariant without bringing any
    remainder transition closer to enabledness.
    """
    fired_parent = Vector(parent.x) - parent.r
    fired_leaf = Vector(leaf.x) - leaf.r
    if fired_leaf == fired_parent:
        return True
    if leaf.r == parent.r:
        before = progress_profile(net, m, parent.sigma, parent.r)
        after = progress_profile(net, m, leaf.sigma, leaf.r)
        return not any(after[t] < before[t] for t in before)
    return False
