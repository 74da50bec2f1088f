import itertools

import pytest

from petricegar.cegar import (
    JumpFamily,
    NoProducerError,
    build_dependency_graph,
    estimate_tokens,
    make_increment_constraint,
    spawn_jump_children,
    transform_jumps,
)
from petricegar.constraints import Increment, Jump, PartialSolution, SccTriple, extend
from petricegar.net import PetriNet, Vector, fire_sequence, parse_net


def min_tokens_over_orders(net, place, transitions, r):
    """Fewest tokens on ``place`` that let the multiset ``r`` fire in some order."""
    word = [t for t in transitions for _ in range(r[t])]
    best = None
    for order in set(itertools.permutations(word)):
        need = have = 0
        for t in order:
            short = net.weight(place, t) - have
            if short > 0:
                need += short
                have += short
            have += net.weight(t, place) - net.weight(place, t)
        best = need if best is None else min(best, need)
    return best


class TestConstraints:
    def test_jump_row(self):
        row = Jump("t", 3).to_row()
        assert (row.relation, row.rhs, dict(row.coeffs)) == ("<=", 2, {"t": 1})
        assert str(Jump("t", 3)) == "t < 3"

    def test_jump_bound_positive(self):
        with pytest.raises(ValueError):
            Jump("t", 0)

    def test_increment(self):
        c = Increment.of({"u": 1, "a": 2, "z": 0}, 3)
        assert c.coeffs == (("a", 2), ("u", 1))
        assert str(c) == "2*a + u >= 3"
        with pytest.raises(ValueError):
            Increment.of({"u": 1}, -1)

    def test_extend_dedups(self):
        a, b = Jump("t", 1), Increment.of({"u": 1}, 1)
        assert extend((a,), [b, a, b]) == (a, b)

    def test_partial_solution_flags(self):
        ps = PartialSolution((Jump("t", 1),), Vector(t=1), ("t",), Vector())
        assert ps.full and ps.has_jumps


class TestDependencyGraph:
    def test_net_a(self, net_a):
        triples = build_dependency_graph(net_a, Vector(s3=1), Vector({"t": 1, "t'": 1}))
        assert triples == [SccTriple(frozenset({"s1", "s2"}), frozenset({"t", "t'"}), frozenset())]

    def test_place_only_source(self):
        net = parse_net("PLACE s, q; MARKING; TRANSITION t CONSUME s; PRODUCE q;")
        triples = build_dependency_graph(net, Vector(), Vector(t=1))
        assert triples == [SccTriple(frozenset({"s"}), frozenset(), frozenset({"t"}))]

    def test_empty_remainder(self, net_a):
        assert build_dependency_graph(net_a, Vector(s3=1), Vector()) == []

    def test_net_c_after_d(self, net_c):
        m_hat = fire_sequence(net_c, net_c.initial_marking, ["d"])
        triples = build_dependency_graph(net_c, m_hat, Vector(k1=1, k2=1, x2=1))
        places = set().union(*(t.places for t in triples))
        assert places <= {"c1", "c2", "a2"}
        for triple in triples:
            assert triple.places and (triple.transitions | triple.dependents)
            assert not triple.transitions & triple.dependents


class TestEstimate:
    def test_net_a(self, net_a):
        (triple,) = build_dependency_graph(net_a, Vector(s3=1), Vector({"t": 1, "t'": 1}))
        assert estimate_tokens(triple, net_a, Vector(s3=1), Vector({"t": 1, "t'": 1})) == 1

    def test_grouped_dependents(self):
        net = PetriNet.build(["s", "q"], {"a": ({"s": 2}, {"s": 1}), "b": ({"s": 3}, {"q": 1})}, {})
        r = Vector(a=1, b=1)
        triple = SccTriple(frozenset({"s"}), frozenset(), frozenset({"a", "b"}))
        expected = min_tokens_over_orders(net, "s", ["a", "b"], r)
        assert expected == 4
        assert estimate_tokens(triple, net, Vector(), r) == expected

    def test_singleton_inside(self):
        net = parse_net("PLACE s, q; MARKING; TRANSITION t CONSUME s, q; PRODUCE s;")
        triple = SccTriple(frozenset({"s"}), frozenset({"t"}), frozenset())
        assert estimate_tokens(triple, net, Vector(), Vector(t=1)) == 1


class TestIncrement:
    def test_net_a(self, net_a):
        c = make_increment_constraint({"s1", "s2"}, 1, [], Vector({"t": 1, "t'": 1}), net_a)
        assert c == Increment.of({"u": 1}, 1)

    def test_net_a_after_prefix(self, net_a):
        c = make_increment_constraint({"s1", "s2"}, 1, ["u", "u'"], Vector({"t": 1, "t'": 1}), net_a)
        assert c == Increment.of({"u": 1}, 2)

    def test_net_c(self, net_c):
        c = make_increment_constraint({"c1"}, 1, ["d"], Vector(k1=1, k2=1, x2=1), net_c)
        assert c == Increment.of({"u": 1}, 1)

    def test_no_producer(self, net_c):
        with pytest.raises(NoProducerError):
            make_increment_constraint({"i"}, 1, [], Vector(u=1), net_c)

    def test_need_positive(self, net_a):
        with pytest.raises(ValueError):
            make_increment_constraint({"s1"}, 0, [], Vector(t=1), net_a)


class TestJumps:
    def test_transform(self):
        order = ("t", "t'", "u", "u'")
        assert transform_jumps((Jump("t", 1),), Vector({"u": 1, "u'": 1}), order) == (
            Increment.of({"u": 1}, 1),
            Increment.of({"u'": 1}, 1),
        )

    def test_transform_keeps_increments(self):
        inc = Increment.of({"u": 1}, 2)
        out = transform_jumps((inc,), Vector(t=1), ("t", "u"))
        assert out == (inc, Increment.of({"t": 1}, 1))

    def test_transform_zero(self):
        assert transform_jumps((Jump("t", 1), Jump("u", 2)), Vector(), ("t", "u")) == ()

    def test_family_order(self):
        parent = PartialSolution((), Vector(), (), Vector())
        family = JumpFamily((), parent, Vector(a=1, b=2, c=1), ["a", "b", "c"])
        assert len(family) == 7
        seen = []
        while (child := spawn_jump_children(family)) is not None:
            seen.append(tuple(str(j) for j in child))
        assert seen == [
            ("a < 1",), ("b < 2",), ("c < 1",),
            ("a < 1", "b < 2"), ("a < 1", "c < 1"), ("b < 2", "c < 1"),
            ("a < 1", "b < 2", "c < 1"),
        ]
        assert spawn_jump_children(family) is None

    def test_children_extend_base(self):
        base = (Increment.of({"u": 1}, 1),)
        family = JumpFamily(base, PartialSolution(base, Vector(), (), Vector()), Vector(t=1), ["t"])
        assert spawn_jump_children(family) == base + (Jump("t", 1),)
