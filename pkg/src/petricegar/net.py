"""Place/transition nets: markings, firing rule, incidence matrix and the net file format.

Net files use a small LoLA-flavoured grammar::

    { comments in braces }
    PLACE s1, s2, s3;
    MARKING s3: 1;
    TRANSITION t  CONSUME s2: 1; PRODUCE s1: 1;
    TRANSITION t' CONSUME s1;    PRODUCE s2;

A weight written without ``: n`` means 1.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Sequence

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
KEYWORDS = frozenset({"PLACE", "MARKING", "TRANSITION", "CONSUME", "PRODUCE"})

DENSE_LIMIT = 10_000


class NetError(ValueError):
    """Raised for structurally invalid nets or unknown node names."""


class NetSyntaxError(NetError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class FiringError(ValueError):
    """A transition was fired while disabled.

    ``position`` is 1-based within the fired sequence (1 for a single ``fire``).
    """

    def __init__(self, transition: str, position: int = 1):
        super().__init__(f"disabled at position {position}: {transition}")
        self.transition = transition
        self.position = position


class Vector(Mapping[str, int]):
    """Immutable sparse vector over ℕ, keyed by place or transition name.

    Missing keys read as 0 and zero entries are never stored, so two vectors
    compare equal iff they agree everywhere.
    """

    __slots__ = ("_data", "_hash")

    def __init__(self, items: Mapping[str, int] | Iterable[tuple[str, int]] | None = None, **kwargs: int):
        data: dict[str, int] = {}
        source = dict(items or {})
        source.update(kwargs)
        for key, value in source.items():
            value = int(value)
            if value < 0:
                raise ValueError(f"negative entry {key}: {value}")
            if value:
                data[key] = value
        self._data = data
        self._hash: int | None = None

    def __getitem__(self, key: str) -> int:
        return self._data.get(key, 0)

    def __contains__(self, key: object) -> bool:
        return key in self._data

    def __iter__(self) -> Iterator[str]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Vector):
            return self._data == other._data
        if isinstance(other, Mapping):
            return self._data == {k: v for k, v in other.items() if v}
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._data.items()))
        return self._hash

    def __le__(self, other: Mapping[str, int]) -> bool:
        return all(other.get(k, 0) >= v for k, v in self._data.items())

    def __ge__(self, other: Mapping[str, int]) -> bool:
        return all(self._data.get(k, 0) >= v for k, v in other.items())

    def __add__(self, other: Mapping[str, int]) -> Vector:
        data = dict(self._data)
        for k, v in other.items():
            data[k] = data.get(k, 0) + v
        return Vector(data)

    def __sub__(self, other: Mapping[str, int]) -> Vector:
        data = dict(self._data)
        for k, v in other.items():
            data[k] = data.get(k, 0) - v
        return Vector(data)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {v}" for k, v in self._data.items())
        return "{" + inner + "}"

    def get(self, key: str, default: int = 0) -> int:  # type: ignore[override]
        return self._data.get(key, default)

    def total(self) -> int:
        return sum(self._data.values())

    def support(self) -> frozenset[str]:
        return frozenset(self._data)

    def dense(self, order: Sequence[str]) -> tuple[int, ...]:
        return tuple(self._data.get(k, 0) for k in order)

    @classmethod
    def from_dense(cls, order: Sequence[str], values: Iterable[int]) -> Vector:
        return cls(zip(order, values))


Marking = Vector
TransitionVector = Vector


@dataclass(frozen=True, eq=False)
class PetriNet:
    """A P/T net with a fixed declaration order for places and transitions.

    ``arcs`` maps ``(source, target)`` to a positive weight, where exactly one
    endpoint is a place. ``initial_marking`` is the ``MARKING`` section of a
    net file and is only a default for problems built on this net.
    """

    places: tuple[str, ...]
    transitions: tuple[str, ...]
    arcs: Mapping[tuple[str, str], int]
    initial_marking: Vector = field(default_factory=Vector)

    def __post_init__(self) -> None:
        places, transitions = tuple(self.places), tuple(self.transitions)
        object.__setattr__(self, "places", places)
        object.__setattr__(self, "transitions", transitions)
        if not places or not transitions:
            raise NetError("a net needs at least one place and one transition")
        for group, kind in ((places, "place"), (transitions, "transition")):
            if len(set(group)) != len(group):
                raise NetError(f"duplicate {kind} name")
        clash = set(places) & set(transitions)
        if clash:
            raise NetError(f"name used for both a place and a transition: {sorted(clash)[0]}")
        place_index = {s: i for i, s in enumerate(places)}
        transition_index = {t: i for i, t in enumerate(transitions)}

        pre: list[list[tuple[int, int]]] = [[] for _ in transitions]
        post: list[list[tuple[int, int]]] = [[] for _ in transitions]
        arcs: dict[tuple[str, str], int] = {}
        for (src, dst), w in self.arcs.items():
            w = int(w)
            if w < 0:
                raise NetError(f"negative arc weight {src} -> {dst}")
            if w == 0:
                continue
            if src in place_index and dst in transition_index:
                pre[transition_index[dst]].append((place_index[src], w))
            elif src in transition_index and dst in place_index:
                post[transition_index[src]].append((place_index[dst], w))
            else:
                raise NetError(f"arc {src} -> {dst} must connect a place and a transition")
            arcs[(src, dst)] = w
        object.__setattr__(self, "arcs", arcs)
        for s in self.initial_marking:
            if s not in place_index:
                raise NetError(f"unknown place in marking: {s}")

        object.__setattr__(self, "place_index", place_index)
        object.__setattr__(self, "transition_index", transition_index)
        object.__setattr__(self, "pre", tuple(tuple(sorted(p)) for p in pre))
        object.__setattr__(self, "post", tuple(tuple(sorted(p)) for p in post))
        # dense per-transition effect, only nonzero entries
        effect = []
        for ti in range(len(transitions)):
            d: dict[int, int] = {}
            for s, w in pre[ti]:
                d[s] = d.get(s, 0) - w
            for s, w in post[ti]:
                d[s] = d.get(s, 0) + w
            effect.append(tuple(sorted((s, v) for s, v in d.items() if v)))
        object.__setattr__(self, "effect", tuple(effect))
        consumers: list[list[int]] = [[] for _ in places]
        producers: list[list[int]] = [[] for _ in places]
        for ti in range(len(transitions)):
            for s, _ in pre[ti]:
                consumers[s].append(ti)
            for s, d in effect[ti]:
                if d > 0:
                    producers[s].append(ti)
        object.__setattr__(self, "consumers", tuple(tuple(c) for c in consumers))
        object.__setattr__(self, "producers", tuple(tuple(p) for p in producers))

    # populated in __post_init__
    place_index: Mapping[str, int] = field(init=False, repr=False)
    transition_index: Mapping[str, int] = field(init=False, repr=False)
    pre: tuple[tuple[tuple[int, int], ...], ...] = field(init=False, repr=False)
    post: tuple[tuple[tuple[int, int], ...], ...] = field(init=False, repr=False)
    effect: tuple[tuple[tuple[int, int], ...], ...] = field(init=False, repr=False)
    consumers: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    producers: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    @classmethod
    def build(
        cls,
        places: Iterable[str],
        transitions: Mapping[str, tuple[Mapping[str, int], Mapping[str, int]]],
        marking: Mapping[str, int] | None = None,
    ) -> PetriNet:
        """Build from ``{transition: (consume, produce)}``."""
        arcs: dict[tuple[str, str], int] = {}
        for t, (consume, produce) in transitions.items():
            for s, w in consume.items():
                arcs[(s, t)] = arcs.get((s, t), 0) + w
            for s, w in produce.items():
                arcs[(t, s)] = arcs.get((t, s), 0) + w
        return cls(tuple(places), tuple(transitions), arcs, Vector(marking or {}))

    def weight(self, src: str, dst: str) -> int:
        """F(src, dst); 0 when there is no arc."""
        return self.arcs.get((src, dst), 0)

    def check_place(self, s: str) -> None:
        if s not in self.place_index:
            raise NetError(f"unknown place: {s}")

    def check_transition(self, t: str) -> None:
        if t not in self.transition_index:
            raise NetError(f"unknown transition: {t}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PetriNet):
            return NotImplemented
        return (
            self.places == other.places
            and self.transitions == other.transitions
            and self.arcs == other.arcs
            and self.initial_marking == other.initial_marking
        )

    def __hash__(self) -> int:
        return hash((self.places, self.transitions, frozenset(self.arcs.items())))


def enabled(net: PetriNet, m: Mapping[str, int], t: str) -> bool:
    net.check_transition(t)
    places = net.places
    return all(m.get(places[s], 0) >= w for s, w in net.pre[net.transition_index[t]])


def fire(net: PetriNet, m: Mapping[str, int], t: str) -> Vector:
    if not enabled(net, m, t):
        raise FiringError(t)
    counts = dict(m)
    places = net.places
    for s, d in net.effect[net.transition_index[t]]:
        counts[places[s]] = counts.get(places[s], 0) + d
    return Vector(counts)


def fire_sequence(net: PetriNet, m: Mapping[str, int], sequence: Iterable[str]) -> Vector:
    """Fire ``sequence`` from ``m``; raises FiringError at the first disabled step."""
    current = Vector(m)
    for pos, t in enumerate(sequence, start=1):
        try:
            current = fire(net, current, t)
        except FiringError:
            raise FiringError(t, pos) from None
    return current


def parikh(sequence: Iterable[str]) -> Vector:
    counts: dict[str, int] = {}
    for t in sequence:
        counts[t] = counts.get(t, 0) + 1
    return Vector(counts)


class IncidenceMatrix:
    """entry(s, t) = F(t, s) - F(s, t); dense rows for small nets, a dict otherwise."""

    def __init__(self, net: PetriNet):
        self.places = net.places
        self.transitions = net.transitions
        self._pi = net.place_index
        self._ti = net.transition_index
        self.sparse = len(net.places) * len(net.transitions) > DENSE_LIMIT
        if self.sparse:
            self._cells = {
                (s, t): d for t, col in enumerate(net.effect) for s, d in col
            }
        else:
            rows = [[0] * len(net.transitions) for _ in net.places]
            for t, col in enumerate(net.effect):
                for s, d in col:
                    rows[s][t] = d
            self._rows = tuple(tuple(r) for r in rows)

    def entry(self, s: str, t: str) -> int:
        si, ti = self._pi[s], self._ti[t]
        if self.sparse:
            return self._cells.get((si, ti), 0)
        return self._rows[si][ti]

    def row(self, s: str) -> dict[str, int]:
        """Nonzero entries of one place row."""
        return {t: v for t in self.transitions if (v := self.entry(s, t))}

    def column(self, t: str) -> dict[str, int]:
        return {s: v for s in self.places if (v := self.entry(s, t))}

    def apply(self, x: Mapping[str, int]) -> dict[str, int]:
        """I·x as a place -> int map (entries may be negative)."""
        out = {s: 0 for s in self.places}
        for t, k in x.items():
            if k:
                for s, v in self.column(t).items():
                    out[s] += v * k
        return out

    def to_lists(self) -> list[list[int]]:
        return [[self.entry(s, t) for t in self.transitions] for s in self.places]


def incidence(net: PetriNet) -> IncidenceMatrix:
    return IncidenceMatrix(net)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<comment>\{[^}]*\})|(?P<id>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<nat>\d+)|(?P<punct>[:,;])"
)


def _tokenize(text: str) -> list[tuple[str, str, int, int]]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            if text[pos] == "{":
                raise NetSyntaxError("unterminated comment", line, pos - line_start + 1)
            raise NetSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup
        value = match.group()
        if kind in ("id", "nat", "punct"):
            if kind == "id" and value in KEYWORDS:
                kind = "kw"
            tokens.append((kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = match.end()
    tokens.append(("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int, int]:
        return self.tokens[self.i]

    def error(self, message: str, token=None) -> NetSyntaxError:
        _, _, line, col = token or self.peek()
        return NetSyntaxError(message, line, col)

    def expect(self, kind: str, value: str | None = None) -> tuple[str, str, int, int]:
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            wanted = value or kind
            found = tok[1] or "end of input"
            raise self.error(f"expected {wanted}, found {found!r}")
        self.i += 1
        return tok

    def accept(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        if tok[0] == kind and (value is None or tok[1] == value):
            self.i += 1
            return True
        return False

    def weighted(self) -> list[tuple[tuple[str, str, int, int], int]]:
        items = []
        if self.peek()[0] != "id":
            return items
        while True:
            tok = self.expect("id")
            weight = 1
            if self.accept("punct", ":"):
                ntok = self.expect("nat")
                weight = int(ntok[1])
                if weight == 0:
                    raise self.error("zero weight; weights must be at least 1", ntok)
            items.append((tok, weight))
            if not self.accept("punct", ","):
                return items


def parse_net(text: str) -> PetriNet:
    p = _Parser(text)
    p.expect("kw", "PLACE")
    places: list[str] = []
    seen: dict[str, str] = {}
    while True:
        tok = p.expect("id")
        if tok[1] in seen:
            raise p.error(f"duplicate node name {tok[1]}", tok)
        seen[tok[1]] = "place"
        places.append(tok[1])
        if not p.accept("punct", ","):
            break
    p.expect("punct", ";")

    p.expect("kw", "MARKING")
    marking: dict[str, int] = {}
    for tok, w in p.weighted():
        if seen.get(tok[1]) != "place":
            raise p.error(f"unknown place {tok[1]}", tok)
        marking[tok[1]] = marking.get(tok[1], 0) + w
    p.expect("punct", ";")

    transitions: list[str] = []
    arcs: dict[tuple[str, str], int] = {}
    pending: list[tuple[tuple[str, str, int, int], str, str, int]] = []
    while p.accept("kw", "TRANSITION"):
        tok = p.expect("id")
        if tok[1] in seen:
            raise p.error(f"duplicate node name {tok[1]}", tok)
        seen[tok[1]] = "transition"
        transitions.append(tok[1])
        for section in ("CONSUME", "PRODUCE"):
            if p.accept("kw", section):
                for ptok, w in p.weighted():
                    pending.append((ptok, tok[1], section, w))
                p.expect("punct", ";")
    if not transitions:
        raise p.error("expected TRANSITION")
    p.expect("eof")

    for ptok, t, section, w in pending:
        if seen.get(ptok[1]) != "place":
            raise p.error(f"unknown place {ptok[1]}", ptok)
        key = (ptok[1], t) if section == "CONSUME" else (t, ptok[1])
        arcs[key] = arcs.get(key, 0) + w
    return PetriNet(tuple(places), tuple(transitions), arcs, Vector(marking))


def render_net(net: PetriNet) -> str:
    def items(pairs: Iterable[tuple[str, int]]) -> str:
        return ", ".join(f"{name}: {w}" for name, w in pairs)

    lines = [f"PLACE {', '.join(net.places)};"]
    marking = [(s, net.initial_marking[s]) for s in net.places if net.initial_marking[s]]
    lines.append(f"MARKING {items(marking)};".replace("MARKING ;", "MARKING;"))
    for ti, t in enumerate(net.transitions):
        consume = [(net.places[s], w) for s, w in net.pre[ti]]
        produce = [(net.places[s], w) for s, w in net.post[ti]]
        lines.append(f"TRANSITION {t}")
        lines.append(f"  CONSUME {items(consume)};".replace("CONSUME ;", "CONSUME;"))
        lines.append(f"  PRODUCE {items(produce)};".replace("PRODUCE ;", "PRODUCE;"))
    return "\n".join(lines) + "\n"
