"""Reachability / coverability problems over a net.

Problem files are YAML (JSON is accepted as a subset)::

    final: {o: 1}
    mode: reach          # or: cover
    require:
      - {transition: x2, min: 1}

The initial marking is the net file's ``MARKING`` section unless ``initial``
is given.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import yaml

from .net import FiringError, NetError, PetriNet, Vector, fire_sequence, parikh


class ProblemError(ValueError):
    pass


class Mode(str, enum.Enum):
    REACH = "reach"
    COVER = "cover"


@dataclass(frozen=True)
class ReachabilityProblem:
    net: PetriNet
    initial: Vector
    final: Vector
    mode: Mode = Mode.REACH
    required: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "initial", Vector(self.initial))
        object.__setattr__(self, "final", Vector(self.final))
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "required", tuple((t, int(k)) for t, k in self.required))
        for marking in (self.initial, self.final):
            for s in marking:
                if s not in self.net.place_index:
                    raise ProblemError(f"unknown place: {s}")
        for t, k in self.required:
            if t not in self.net.transition_index:
                raise ProblemError(f"unknown transition: {t}")
            if k < 1:
                raise ProblemError(f"required count for {t} must be at least 1")

    def goal_reached(self, marking: Mapping[str, int]) -> bool:
        if self.mode is Mode.REACH:
            return Vector(marking) == self.final
        return all(marking.get(s, 0) >= k for s, k in self.final.items())

    def requirements_met(self, sequence: Iterable[str]) -> bool:
        counts = parikh(sequence)
        return all(counts[t] >= k for t, k in self.required)

    def check_witness(self, sequence: Iterable[str]) -> str | None:
        """Return None if ``sequence`` solves the problem, else a reason."""
        sequence = list(sequence)
        for t in sequence:
            if t not in self.net.transition_index:
                raise NetError(f"unknown transition: {t}")
        try:
            reached = fire_sequence(self.net, self.initial, sequence)
        except FiringError as exc:
            return str(exc)
        if not self.goal_reached(reached):
            return f"final marking {reached!r} does not match the target"
        if not self.requirements_met(sequence):
            return "required transition counts not met"
        return None


def make_problem(
    net: PetriNet,
    final: Mapping[str, int],
    mode: Mode | str = Mode.REACH,
    required: Iterable[tuple[str, int]] = (),
    initial: Mapping[str, int] | None = None,
) -> ReachabilityProblem:
    for s, k in final.items():
        if int(k) < 0:
            raise ProblemError(f"negative count for {s}")
    return ReachabilityProblem(
        net,
        Vector(net.initial_marking if initial is None else initial),
        Vector(final),
        Mode(mode),
        tuple(required),
    )


def _count(value: object, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProblemError(f"{what} must be an integer, got {value!r}")
    if value < 0:
        raise ProblemError(f"negative count for {what}")
    return value


def parse_problem(text: str, net: PetriNet) -> ReachabilityProblem:
    try:
        doc = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ProblemError(f"malformed problem file: {exc}") from None
    if not isinstance(doc, dict):
        raise ProblemError("problem file must be a mapping")
    unknown = set(doc) - {"final", "mode", "require", "initial"}
    if unknown:
        raise ProblemError(f"unknown keys: {sorted(unknown)}")

    final = {str(s): _count(k, str(s)) for s, k in (doc.get("final") or {}).items()}
    initial = doc.get("initial")
    if initial is not None:
        initial = {str(s): _count(k, str(s)) for s, k in initial.items()}
    try:
        mode = Mode(doc.get("mode", "reach"))
    except ValueError:
        raise ProblemError(f"mode must be reach or cover, got {doc.get('mode')!r}") from None

    required = []
    for item in doc.get("require") or []:
        if not isinstance(item, dict) or "transition" not in item:
            raise ProblemError(f"bad require entry: {item!r}")
        required.append((str(item["transition"]), _count(item.get("min", 1), str(item["transition"]))))
    return make_problem(net, final, mode, required, initial)


def render_problem(problem: ReachabilityProblem) -> str:
    doc: dict[str, object] = {"final": dict(problem.final), "mode": problem.mode.value}
    if problem.required:
        doc["require"] = [{"transition": t, "min": k} for t, k in problem.required]
    return yaml.safe_dump(doc, sort_keys=False)
