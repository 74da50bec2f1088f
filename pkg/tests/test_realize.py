import random

from hypothesis import given, settings, strategies as st

from petricegar.constraints import PartialSolution
from petricegar.net import PetriNet, Vector, enabled, fire, parikh
from petricegar.randomnets import random_net
from petricegar.realize import check_prune, progress_profile, realize, stubborn_set


def closure_by_fixpoint(net, m, remaining):
    """Straightforward re-statement of the closure rules, iterating until stable."""
    support = [t for t in net.transitions if remaining.get(t, 0)]
    result = {support[0]}
    while True:
        grow = set(result)
        for t in result:
            if enabled(net, m, t):
                inputs = {s for s in net.places if net.weight(s, t)}
                grow |= {u for u in support if inputs & {s for s in net.places if net.weight(s, u)}}
            else:
                s = next(p for p in net.places if m.get(p, 0) < net.weight(p, t))
                grow |= {u for u in support if net.weight(u, s) > net.weight(s, u)}
        if grow == result:
            return result
        result = grow


def maximal_words(net, m, y):
    """All fireable words w with parikh(w) <= y that cannot be extended."""
    out = set()

    def go(mk, rem, word):
        nxt = [t for t in net.transitions if rem[t] and enabled(net, mk, t)]
        if not nxt:
            out.add(tuple(word))
        for t in nxt:
            go(fire(net, mk, t), rem - {t: 1}, word + [t])

    go(Vector(m), Vector(y), [])
    return out


class TestStubborn:
    def test_net_a(self, net_a):
        rem = Vector({"t": 1, "t'": 1, "u": 1, "u'": 1})
        got = stubborn_set(net_a, Vector(s3=1), rem)
        assert got == closure_by_fixpoint(net_a, Vector(s3=1), rem) == {"t", "t'", "u"}
        assert {t for t in got if enabled(net_a, {"s3": 1}, t)} == {"u"}

    def test_singleton(self, net_c):
        assert stubborn_set(net_c, Vector(a1=1), Vector(x1=1)) == {"x1"}

    def test_dead_closure_has_no_enabled_member(self, net_c):
        got = stubborn_set(net_c, Vector(), Vector(k1=1, x2=1))
        assert not any(enabled(net_c, {}, t) for t in got)


class TestRealize:
    def test_net_a_full(self, net_a):
        res = realize(net_a, Vector(s3=1), Vector({"t": 1, "t'": 1, "u": 1, "u'": 1}))
        assert res.full == ("u", "t", "t'", "u'")

    def test_net_a_stuck(self, net_a):
        res = realize(net_a, Vector(s3=1), Vector({"t": 1, "t'": 1}))
        assert res.full is None
        assert [(leaf.sigma, leaf.r) for leaf in res.leaves] == [((), Vector({"t": 1, "t'": 1}))]

    def test_zero(self, net_a):
        assert realize(net_a, Vector(s3=1), Vector()).full == ()

    def test_node_budget(self, net_b):
        res = realize(net_b, net_b.initial_marking, Vector(t=3, u=3), max_nodes=1)
        assert res.incomplete

    def test_leaves_are_maximal(self, net_c):
        y = Vector(u=1, k1=1, x2=1, d=1)
        res = realize(net_c, net_c.initial_marking, y)
        for leaf in res.leaves:
            assert leaf.r == y - parikh(leaf.sigma)
            m = net_c.initial_marking
            for t in leaf.sigma:
                m = fire(net_c, m, t)
            assert not any(enabled(net_c, m, t) for t in leaf.r)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_unreduced_search_finds_all_maximal_words(seed):
    rng = random.Random(seed)
    net = random_net(rng)
    y = Vector({t: rng.randint(0, 2) for t in net.transitions})
    if y.total() > 6:
        return
    expected = maximal_words(net, net.initial_marking, y)
    full = [w for w in expected if parikh(w) == y]
    res = realize(net, net.initial_marking, y, stubborn=False, subtree_cut=False, prune=False)
    if full:
        assert res.full in expected and parikh(res.full) == y
    else:
        assert res.full is None
        assert {leaf.sigma for leaf in res.leaves} == expected


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_reductions_keep_full_realizations(seed):
    rng = random.Random(seed)
    net = random_net(rng)
    y = Vector({t: rng.randint(0, 2) for t in net.transitions})
    plain = realize(net, net.initial_marking, y, stubborn=False, subtree_cut=False)
    reduced = realize(net, net.initial_marking, y)
    assert (plain.full is None) == (reduced.full is None)
    if reduced.full is not None:
        assert parikh(reduced.full) == y


class TestProgress:
    def test_missing_one(self, net_a):
        assert progress_profile(net_a, Vector(s3=1), [], Vector(t=1)) == {"t": 1}

    def test_enabled_along_the_way(self, net_a):
        assert progress_profile(net_a, Vector(s3=1), ["u"], Vector(t=1)) == {"t": 0}


class TestPrune:
    def test_nothing_new_fired(self, net_a):
        parent = PartialSolution((), Vector({"t": 1, "t'": 1}), (), Vector({"t": 1, "t'": 1}))
        y = Vector({"t": 1, "t'": 1, "u": 1, "u'": 1})
        leaf = PartialSolution((), y, (), y)
        assert check_prune(net_a, Vector(s3=1), parent, leaf)

    def test_invariant_fired_without_progress(self):
        # a loop on q that never touches the starved place s
        net = PetriNet.build(
            ["s", "q", "p"],
            {"t": ({"s": 1}, {}), "a": ({"q": 1}, {"p": 1}), "b": ({"p": 1}, {"q": 1})},
            {"q": 1},
        )
        parent = PartialSolution((), Vector(t=1), (), Vector(t=1))
        leaf = PartialSolution((), Vector(t=1, a=1, b=1), ("a", "b"), Vector(t=1))
        assert check_prune(net, Vector(q=1), parent, leaf)

    def test_progress_keeps_leaf(self):
        net = PetriNet.build(
            ["s", "q", "p"],
            {"t": ({"s": 2}, {}), "a": ({"q": 1}, {"p": 1, "s": 1}), "b": ({"p": 1, "s": 1}, {"q": 1})},
            {"q": 1},
        )
        # after "a" the measure for t drops from 2 to 1
        parent = PartialSolution((), Vector(t=1), (), Vector(t=1))
        leaf = PartialSolution((), Vector(t=1, a=1, b=1), ("a", "b"), Vector(t=1))
        assert not check_prune(net, Vector(q=1), parent, leaf)
