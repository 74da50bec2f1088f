"""Failed increment constraints, collected during refinement and turned into an
unreachability report.

A record says: after firing ``prefix``, the places ``places`` lacked at
least ``missing`` tokens to fire one of ``transitions`` (or all of
``dependents``), and no solution of the state equation could supply them.
"""

from __future__ import annotations

import threading
from collections.abc import Iterable
from dataclasses import dataclass

from .net import PetriNet
from .problem import ReachabilityProblem

REASONS = ("no-producer", "infeasible-after-add", "pruned-no-progress")


@dataclass(frozen=True)
class FailedConstraintRecord:
    places: frozenset[str]
    transitions: frozenset[str]
    dependents: frozenset[str]
    missing: int
    prefix: tuple[str, ...]
    reason: str
    constraint: str = ""

    def __post_init__(self) -> None:
        if not self.places:
            raise ValueError("a failure record needs at least one place")
        if self.missing < 1:
            raise ValueError("missing token count must be at least 1")
        if self.reason not in REASONS:
            raise ValueError(f"unknown reason {self.reason!r}")

    @property
    def key(self) -> tuple:
        return (self.places, self.reason, self.missing)

    def to_dict(self, count: int = 1) -> dict:
        return {
            "places": sorted(self.places),
            "transitions": sorted(self.transitions),
            "dependents": sorted(self.dependents),
            "missing": self.missing,
            "prefix": list(self.prefix),
            "reason": self.reason,
            "constraint": self.constraint,
            "count": count,
        }


class DiagnosticsCollector:
    """Thread-safe sink; identical (places, reason, missing) records are coalesced."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._records: dict[tuple, list] = {}
        self._remainders: set[str] = set()

    def record_failure(self, record: FailedConstraintRecord) -> None:
        with self._lock:
            entry = self._records.get(record.key)
            if entry is None:
                self._records[record.key] = [record, 1]
            else:
                entry[1] += 1

    def note_remainder(self, support: Iterable[str]) -> None:
        with self._lock:
            self._remainders.update(support)

    def __len__(self) -> int:
        return len(self._records)

    def entries(self) -> list[tuple[FailedConstraintRecord, int]]:
        with self._lock:
            return [(r, c) for r, c in self._records.values()]

    def count(self, record: FailedConstraintRecord) -> int:
        entry = self._records.get(record.key)
        return entry[1] if entry else 0

    @property
    def remainder_support(self) -> frozenset[str]:
        return frozenset(self._remainders)


def record_failure(collector: DiagnosticsCollector, record: FailedConstraintRecord) -> None:
    collector.record_failure(record)


@dataclass(frozen=True)
class DiagnosticsReport:
    records: tuple[tuple[FailedConstraintRecord, int], ...]
    blocked_places: frozenset[str]
    blocked_transitions: frozenset[str]
    affected_transitions: frozenset[str]
    summary: str
    state_equation_infeasible: bool = False

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict(c) for r, c in self.records],
            "blocked_places": sorted(self.blocked_places),
            "blocked_transitions": sorted(self.blocked_transitions),
            "affected_transitions": sorted(self.affected_transitions),
            "summary": self.summary,
        }

    def to_text(self) -> str:
        lines = [self.summary]
        for record, count in self.records:
            who = sorted(record.transitions) or sorted(record.dependents)
            lines.append(
                f"  places {{{', '.join(sorted(record.places))}}} need {record.missing} more token(s)"
                f" to fire {'one of' if record.transitions else 'all of'} {{{', '.join(who)}}}"
                f" after [{' '.join(record.prefix)}] ({record.reason}, seen {count}x)"
            )
        if self.blocked_places or self.blocked_transitions:
            lines.append(f"blocked places: {', '.join(sorted(self.blocked_places))}")
            lines.append(f"blocked transitions: {', '.join(sorted(self.blocked_transitions))}")
        if self.affected_transitions:
            lines.append(f"affected transitions: {', '.join(sorted(self.affected_transitions))}")
        return "\n".join(lines)

    def to_graph(self, net: PetriNet) -> dict:
        """Node/edge list; each node carries a ``region`` of blocked, affected or none."""

        def region(name: str) -> str:
            if name in self.blocked_places or name in self.blocked_transitions:
                return "blocked"
            if name in self.affected_transitions:
                return "affected"
            return "none"

        nodes = [{"id": s, "kind": "place", "region": region(s)} for s in net.places]
        nodes += [{"id": t, "kind": "transition", "region": region(t)} for t in net.transitions]
        edges = [{"source": a, "target": b, "weight": w} for (a, b), w in net.arcs.items()]
        return {"nodes": nodes, "edges": edges}


def _sort_key(entry: tuple[FailedConstraintRecord, int]) -> tuple:
    r = entry[0]
    return (sorted(r.places), r.reason, r.missing, sorted(r.transitions), sorted(r.dependents))


def build_report(
    problem: ReachabilityProblem,
    collector: DiagnosticsCollector,
    state_equation_infeasible: bool = False,
) -> DiagnosticsReport:
    entries = sorted(collector.entries(), key=_sort_key)
    places: set[str] = set()
    transitions: set[str] = set()
    for record, _ in entries:
        places |= record.places
        transitions |= record.transitions | record.dependents
    affected = collector.remainder_support - transitions
    net = problem.net
    assert places <= set(net.places) and (transitions | affected) <= set(net.transitions)

    if state_equation_infeasible and not entries:
        summary = "state equation infeasible: no transition vector leads from the initial to the final marking"
    elif entries:
        summary = (
            f"unreachable: {len(entries)} token shortage(s) could not be repaired"
            " (each is a partial explanation, not necessarily the only one)"
        )
    else:
        summary = "no solution of the state equation could be realized or extended"
    return DiagnosticsReport(
        tuple(entries),
        frozenset(places),
        frozenset(transitions),
        frozenset(affected),
        summary,
        state_equation_infeasible,
    )
