"""Seeded random nets and problems for the cross-check suites."""

from __future__ import annotations

import random

from .net import PetriNet, Vector, enabled, fire
from .problem import Mode, ReachabilityProblem, make_problem

MAX_PLACES = 5
MAX_TRANSITIONS = 5
ARC_DENSITY = 0.3
MAX_WEIGHT = 2
MAX_TOKENS = 3


def _marking(rng: random.Random, places: list[str], tokens: int) -> dict[str, int]:
    m: dict[str, int] = {}
    for _ in range(tokens):
        s = rng.choice(places)
        m[s] = m.get(s, 0) + 1
    return m


def random_net(rng: random.Random, acyclic: bool = False) -> PetriNet:
    """At most 5 places and 5 transitions, arcs with probability 0.3, weights 1-2.

    Acyclic nets rank the places; each transition consumes from its pivot
    place (plus maybe lower ones) and produces only above the pivot, so every
    firing moves tokens upward and the state space is finite.
    """
    places = [f"p{i}" for i in range(rng.randint(1, MAX_PLACES))]
    transitions = [f"t{i}" for i in range(rng.randint(1, MAX_TRANSITIONS))]
    arcs: dict[tuple[str, str], int] = {}
    if acyclic:
        order = rng.sample(places, len(places))
        for t in transitions:
            pivot = rng.randrange(len(order))
            arcs[(order[pivot], t)] = rng.randint(1, MAX_WEIGHT)
            for k, s in enumerate(order):
                if k < pivot and rng.random() < ARC_DENSITY:
                    arcs[(s, t)] = rng.randint(1, MAX_WEIGHT)
                elif k > pivot and rng.random() < ARC_DENSITY:
                    arcs[(t, s)] = rng.randint(1, MAX_WEIGHT)
    else:
        for s in places:
            for t in transitions:
                for arc in ((s, t), (t, s)):
                    if rng.random() < ARC_DENSITY:
                        arcs[arc] = rng.randint(1, MAX_WEIGHT)
    marking = _marking(rng, places, rng.randint(0, MAX_TOKENS))
    return PetriNet(tuple(places), tuple(transitions), arcs, Vector(marking))


def random_run(rng: random.Random, net: PetriNet, m: Vector, max_len: int = 6) -> list[str]:
    run = []
    for _ in range(rng.randint(0, max_len)):
        choices = [t for t in net.transitions if enabled(net, m, t)]
        if not choices:
            break
        t = rng.choice(choices)
        m = fire(net, m, t)
        run.append(t)
    return run


def random_problem(
    rng: random.Random,
    acyclic: bool = False,
    allow_cover: bool = True,
    allow_required: bool = True,
) -> ReachabilityProblem:
    """Half the targets come from an actual run (reachable), half are uniform."""
    net = random_net(rng, acyclic)
    m0 = net.initial_marking
    if rng.random() < 0.5:
        target = m0
        for t in random_run(rng, net, m0):
            target = fire(net, target, t)
        final = dict(target)
    else:
        final = _marking(rng, list(net.places), rng.randint(0, MAX_TOKENS))
    mode = Mode.COVER if allow_cover and rng.random() < 0.2 else Mode.REACH
    required = []
    if allow_required and rng.random() < 0.3:
        required.append((rng.choice(net.transitions), 1))
    return make_problem(net, final, mode, required)
