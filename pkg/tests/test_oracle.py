import itertools
import random

import pytest

from petricegar.cegar import Verdict
from petricegar.ilp import LinearSystem, Row, build_state_equation, omega_compare
from petricegar.net import Vector, parikh
from petricegar.oracle import OracleBudget, bfs_reach, enumerate_solutions
from petricegar.problem import Mode, make_problem
from petricegar.randomnets import random_net, random_problem


def test_net_c_shortest(net_c):
    out = bfs_reach(make_problem(net_c, {"o": 1}))
    assert out.verdict is Verdict.REACHABLE and out.witness == ("d", "x1")


def test_trivial(net_a):
    assert bfs_reach(make_problem(net_a, {"s3": 1})).witness == ()


def test_net_c_required_has_infinite_state_space(net_c):
    # the k1/k2 loop pumps a2 forever, so exhaustive search cannot finish
    out = bfs_reach(make_problem(net_c, {"o": 1}, required=[("x2", 1)]), OracleBudget(max_markings=2000))
    assert out.verdict is Verdict.INCONCLUSIVE


def test_finite_unreachable(net_a):
    # NET-A conserves its single token
    out = bfs_reach(make_problem(net_a, {"s1": 2}))
    assert out.verdict is Verdict.UNREACHABLE


def test_required_counts(net_a):
    out = bfs_reach(make_problem(net_a, {"s3": 1}, required=[("t", 2)]))
    assert out.witness is not None and parikh(out.witness)["t"] >= 2
    assert len(out.witness) == 6


def test_cover(net_c):
    out = bfs_reach(make_problem(net_c, {"a1": 1}, Mode.COVER))
    assert out.witness == ("u",)


def test_budget_validation():
    with pytest.raises(ValueError):
        OracleBudget(max_markings=0)


def test_enumerate_net_a(net_a):
    system = build_state_equation(make_problem(net_a, {"s3": 1}))
    got = enumerate_solutions(system, 2)
    assert set(got) == {Vector(), Vector({"t": 1, "t'": 1}), Vector({"u": 1, "u'": 1})}
    # Ω puts (0,0,1,1) before (1,1,0,0) in declared order t, t', u, u'
    assert got == [Vector(), Vector({"u": 1, "u'": 1}), Vector({"t": 1, "t'": 1})]


def test_enumerate_parity():
    assert enumerate_solutions(LinearSystem(("x",), (Row.of({"x": 2}, "=", 1),)), 5) == []


def test_enumerate_free():
    assert enumerate_solutions(LinearSystem(("x",)), 2) == [Vector(), Vector(x=1), Vector(x=2)]


@pytest.mark.parametrize("seed", range(30))
def test_enumerate_matches_product_scan(seed):
    rng = random.Random(seed)
    variables = tuple(f"v{i}" for i in range(rng.randint(1, 4)))
    rows = tuple(
        Row.of({v: rng.randint(-2, 2) for v in variables}, rng.choice(("=", ">=", "<=")), rng.randint(-2, 3))
        for _ in range(rng.randint(0, 2))
    )
    system = LinearSystem(variables, rows)
    got = enumerate_solutions(system, 4)
    scan = {
        Vector(dict(zip(variables, xs)))
        for xs in itertools.product(range(5), repeat=len(variables))
        if sum(xs) <= 4 and system.satisfied_by(dict(zip(variables, xs)))
    }
    assert set(got) == scan and len(got) == len(scan)
    for a, b in zip(got, got[1:]):
        assert omega_compare(a, b, variables) == -1


@pytest.mark.parametrize("seed", range(40))
def test_bfs_witness_solves_state_equation(seed):
    problem = random_problem(random.Random(seed))
    out = bfs_reach(problem, OracleBudget(max_markings=20_000))
    if out.witness is not None:
        assert problem.check_witness(out.witness) is None
        assert build_state_equation(problem).satisfied_by(parikh(out.witness))


@pytest.mark.parametrize("seed", range(20))
def test_acyclic_nets_are_finite(seed):
    rng = random.Random(seed)
    net = random_net(rng, acyclic=True)
    for t in net.transitions:
        assert any(net.weight(s, t) for s in net.places)
    problem = make_problem(net, {})
    assert bfs_reach(problem, OracleBudget(max_markings=50_000)).verdict is not Verdict.INCONCLUSIVE
