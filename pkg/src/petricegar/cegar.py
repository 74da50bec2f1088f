"""The refinement loop: traverse solutions of the state equation, realize them,
and add jump or increment constraints when a solution is spurious.

Jobs are partial solutions ``(Γ, x, σ, r)`` kept in a queue ordered by the
size of ``x``. Processing a job:

1. replace jump constraints in Γ by lower bounds at Γ's own Ω-minimal solution,
2. derive increment constraints Δ from the token shortages behind ``r``,
3. solve the state equation plus Γ ∪ Δ for ``y`` (skipping families seen before),
4. open a family of jump children ``t < y(t)`` over transitions where ``y`` grew,
5. search for a realization of ``y``; unextendable paths become new jobs.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import logging
import random
import threading
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import networkx as nx

from .constraints import Constraint, Increment, Jump, PartialSolution, SccTriple, extend
from .diagnostics import DiagnosticsCollector, DiagnosticsReport, FailedConstraintRecord, build_report
from .ilp import SolveBudget, SolveOutcome, SolverBackend, build_state_equation, omega_key, solve_omega_min
from .net import PetriNet, Vector, fire_sequence, incidence, parikh
from .problem import ReachabilityProblem
from .realize import DEFAULT_MAX_NODES, realize

log = logging.getLogger(__name__)


class NoProducerError(ValueError):
    """No transition outside the remainder can put tokens on the starved places."""


def build_dependency_graph(net: PetriNet, m_hat: Mapping[str, int], r: Mapping[str, int]) -> list[SccTriple]:
    """Source components of the place/transition graph of token shortages.

    Edges run from a place to a remainder transition it underfunds, and from a
    remainder transition to a place it effectively produces on.
    """
    T0 = [t for t in net.transitions if r.get(t, 0) > 0]
    if not T0:
        return []
    S0 = [s for s in net.places if any(net.weight(s, t) > m_hat.get(s, 0) for t in T0)]
    g = nx.DiGraph()
    g.add_nodes_from(("p", s) for s in S0)
    g.add_nodes_from(("t", t) for t in T0)
    for s in S0:
        for t in T0:
            if net.weight(s, t) > m_hat.get(s, 0):
                g.add_edge(("p", s), ("t", t))
            if net.weight(t, s) > net.weight(s, t):
                g.add_edge(("t", t), ("p", s))

    dag = nx.condensation(g)
    order = {node: i for i, node in enumerate([("p", s) for s in S0] + [("t", t) for t in T0])}
    sources = [c for c in dag.nodes if dag.in_degree(c) == 0]
    sources.sort(key=lambda c: min(order[v] for v in dag.nodes[c]["members"]))
    triples = []
    for c in sources:
        members = dag.nodes[c]["members"]
        places = frozenset(v for kind, v in members if kind == "p")
        inside = frozenset(v for kind, v in members if kind == "t")
        dependents = frozenset(
            t for t in T0 if t not in inside and any(g.has_edge(("p", s), ("t", t)) for s in places)
        )
        triples.append(SccTriple(places, inside, dependents))
    return triples


def estimate_tokens(triple: SccTriple, net: PetriNet, m_hat: Mapping[str, int], r: Mapping[str, int]) -> int:
    """Lower estimate of the extra tokens the component's places need."""
    if triple.transitions:
        return min(
            sum(max(0, net.weight(s, t) - m_hat.get(s, 0)) for s in triple.places)
            for t in sorted(triple.transitions)
        )
    (s,) = triple.places
    groups: dict[int, list[str]] = {}
    for t in triple.dependents:
        groups.setdefault(net.weight(t, s), []).append(t)
    n = c = 0
    # transitions that return the most tokens fire first
    for j in sorted(groups, reverse=True):
        c += j + sum(r.get(t, 0) * (net.weight(s, t) - j) for t in groups[j])
        if c > 0:
            n += c
        c = -j
    return n


def make_increment_constraint(
    places: frozenset[str] | set[str],
    n: int,
    sigma: Sequence[str],
    r: Mapping[str, int],
    net: PetriNet,
) -> Increment:
    """Ask for ``n`` more tokens on ``places`` from transitions outside the remainder."""
    if n < 1:
        raise ValueError("token need must be at least 1")
    gain = {
        t: sum(net.weight(t, s) - net.weight(s, t) for s in places)
        for t in net.transitions
        if not r.get(t, 0)
    }
    coeffs = {t: g for t, g in gain.items() if g > 0}
    if not coeffs:
        raise NoProducerError(f"nothing outside the remainder produces on {sorted(places)}")
    fired = parikh(sigma)
    return Increment.of(coeffs, n + sum(g * fired[t] for t, g in coeffs.items()))


def transform_jumps(family: Sequence[Constraint], z: Mapping[str, int], order: Sequence[str] | None = None) -> tuple[Constraint, ...]:
    """Drop jump constraints in favour of ``t >= z(t)`` bounds; increments are kept."""
    kept = [c for c in family if isinstance(c, Increment)]
    names = order if order is not None else sorted(z)
    bounds = [Increment.of({t: 1}, z[t]) for t in names if z.get(t, 0) > 0]
    return extend(tuple(kept), bounds)


class JumpFamily:
    """Lazy enumeration of jump children: nonempty subsets of the grown
    transitions, smallest first, then in index order."""

    def __init__(self, base: tuple[Constraint, ...], parent: PartialSolution, y: Mapping[str, int], candidates: Sequence[str]):
        self.base = base
        self.parent = parent
        self.jumps = [Jump(t, y[t]) for t in candidates]
        self._cursor = itertools.chain.from_iterable(
            itertools.combinations(self.jumps, k) for k in range(1, len(self.jumps) + 1)
        )

    def __len__(self) -> int:
        return 2 ** len(self.jumps) - 1


def spawn_jump_children(family: JumpFamily) -> tuple[Constraint, ...] | None:
    """Next constraint family Γ ∪ R, or None when every subset has been handed out."""
    subset = next(family._cursor, None)
    if subset is None:
        return None
    return extend(family.base, subset)


class Verdict(str, enum.Enum):
    REACHABLE = "reachable"
    UNREACHABLE = "unreachable"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EngineConfig:
    solve_budget: SolveBudget = SolveBudget()
    max_queue: int = 100_000
    max_steps: int = 10_000
    search_nodes: int = DEFAULT_MAX_NODES
    workers: int = 1
    stubborn: bool = True
    subtree_cut: bool = True
    prune: bool = True
    memo: bool = True
    deterministic: bool = True
    seed: int = 0
    backend: SolverBackend = solve_omega_min

    def __post_init__(self) -> None:
        for name in ("max_queue", "max_steps", "search_nodes", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass
class Stats:
    ilp_calls: int = 0
    ilp_nodes: int = 0
    cegar_steps: int = 0
    increment_refinements: int = 0
    jump_children: int = 0
    partial_solutions: int = 0
    memo_hits: int = 0
    pruned_leaves: int = 0
    search_nodes: int = 0
    branching: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        b = self.branching
        return {
            "ilp_calls": self.ilp_calls,
            "ilp_nodes": self.ilp_nodes,
            "cegar_steps": self.cegar_steps,
            "increment_refinements": self.increment_refinements,
            "jump_children": self.jump_children,
            "partial_solutions": self.partial_solutions,
            "memo_hits": self.memo_hits,
            "pruned_leaves": self.pruned_leaves,
            "search_nodes": self.search_nodes,
            "branching_avg": round(sum(b) / len(b), 4) if b else 0.0,
            "branching_max": max(b, default=0),
        }


@dataclass
class Outcome:
    verdict: Verdict
    stats: Stats
    witness: tuple[str, ...] | None = None
    diagnostics: DiagnosticsReport | None = None
    reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "witness": list(self.witness) if self.witness is not None else None,
            "reason": self.reason,
            "stats": self.stats.to_dict(),
            "diagnostics": self.diagnostics.to_dict() if self.diagnostics else None,
        }


@dataclass
class _Job:
    ps: PartialSolution
    family: JumpFamily | None = None
    seed: bool = False


class _Engine:
    def __init__(self, problem: ReachabilityProblem, config: EngineConfig):
        self.problem = problem
        self.config = config
        self.net = problem.net
        self.order = problem.net.transitions
        self.base = build_state_equation(problem)
        self.matrix = incidence(problem.net)
        self.stats = Stats()
        self.collector = DiagnosticsCollector()
        self.lock = threading.RLock()
        self.wakeup = threading.Condition(self.lock)
        self.queue: list = []
        self.tie = itertools.count()
        self.rng = random.Random(config.seed)
        self.families_seen: set[frozenset] = set()
        self.leaves_seen: set[tuple] = set()
        self.budget_events: list[str] = []
        self.witness: tuple[str, ...] | None = None
        self.seed_infeasible = False
        self.triples_emitted: set[SccTriple] = set()

    # -- shared state, all under self.lock

    def push(self, job: _Job) -> None:
        with self.lock:
            tie = next(self.tie) if self.config.deterministic else (self.rng.random(), next(self.tie))
            heapq.heappush(self.queue, (job.ps.x.total(), tie, job))
            self.stats.partial_solutions += 1
            if len(self.queue) > self.config.max_queue:
                self.budget("queue length limit")
            self.wakeup.notify()

    def budget(self, reason: str) -> None:
        with self.lock:
            self.budget_events.append(reason)

    def claim(self, seen: set, key) -> bool:
        if not self.config.memo:
            return True
        with self.lock:
            if key in seen:
                self.stats.memo_hits += 1
                return False
            seen.add(key)
            return True

    def spawn(self, family: JumpFamily) -> None:
        constraints = spawn_jump_children(family)
        if constraints is None:
            return
        p = family.parent
        with self.lock:
            self.stats.jump_children += 1
        self.push(_Job(PartialSolution(constraints, p.x, p.sigma, p.r), family))

    def solve(self, constraints: Sequence[Constraint]) -> SolveOutcome:
        system = self.base.with_rows(c.to_row() for c in constraints)
        out = self.config.backend(system, self.config.solve_budget)
        with self.lock:
            self.stats.ilp_calls += 1
            self.stats.ilp_nodes += out.nodes
        if out.status == "budget":
            self.budget("ILP budget exceeded")
        return out

    def fail(self, delta, sigma, reason: str) -> None:
        for triple, n, c in delta:
            assert triple in self.triples_emitted
            self.collector.record_failure(
                FailedConstraintRecord(
                    triple.places, triple.transitions, triple.dependents, n, tuple(sigma), reason, str(c)
                )
            )

    # -- one job

    def process(self, job: _Job) -> None:
        net, m, cfg = self.net, self.problem.initial, self.config
        ps = job.ps
        if job.family is not None:
            self.spawn(job.family)

        gamma = ps.constraints
        if ps.has_jumps:
            out = self.solve(gamma)
            if not out.feasible:
                return
            gamma = transform_jumps(gamma, out.solution, self.order)

        delta = []
        if ps.r:
            m_hat = fire_sequence(net, m, ps.sigma)
            self.collector.note_remainder(ps.r.support())
            triples = build_dependency_graph(net, m_hat, ps.r)
            with self.lock:
                self.triples_emitted.update(triples)
            for triple in triples:
                n = estimate_tokens(triple, net, m_hat, ps.r)
                try:
                    c = make_increment_constraint(triple.places, n, ps.sigma, ps.r, net)
                except NoProducerError:
                    self.fail([(triple, n, "")], ps.sigma, "no-producer")
                    return
                delta.append((triple, n, c))

        family = extend(gamma, [c for _, _, c in delta])
        key = frozenset(family)
        if not self.claim(self.families_seen, key):
            return
        if delta:
            with self.lock:
                self.stats.increment_refinements += 1
        out = self.solve(family)
        if not out.feasible:
            if out.status == "infeasible":
                if job.seed:
                    self.seed_infeasible = True
                self.fail(delta, ps.sigma, "infeasible-after-add")
            return
        y = out.solution
        assert omega_key(y, self.order) >= omega_key(ps.x, self.order), "refinement went Ω-backwards"

        grown = [t for t in self.order if y[t] > ps.x[t]]
        spawned = 0
        if grown:
            self.spawn(JumpFamily(gamma, PartialSolution(gamma, ps.x, ps.sigma, ps.r), y, grown))
            spawned = 1

        # pruning is only justified when y = x + (T-invariant)
        parent = None
        if delta and Vector(ps.x) <= y:
            added = y - ps.x
            if not any(self.matrix.apply(added).values()):
                parent = ps
        res = realize(
            net, m, y, parent, family,
            stubborn=cfg.stubborn, subtree_cut=cfg.subtree_cut, prune=cfg.prune,
            max_nodes=cfg.search_nodes,
        )
        with self.lock:
            self.stats.search_nodes += res.nodes
            self.stats.pruned_leaves += len(res.pruned)
        if res.incomplete:
            self.budget("search node budget exceeded")
        if res.full is not None:
            problem_ = self.problem.check_witness(res.full)
            assert problem_ is None, f"realization is not a witness: {problem_}"
            with self.lock:
                if self.witness is None:
                    self.witness = res.full
            return
        for leaf in res.pruned:
            self.fail(delta, leaf.sigma, "pruned-no-progress")

        enqueued = 0
        for leaf in res.leaves:
            if not self.claim(self.leaves_seen, (key, parikh(leaf.sigma))):
                continue
            self.push(_Job(leaf))
            enqueued += 1
        with self.lock:
            self.stats.branching.append(spawned + enqueued)

    # -- drivers

    def run(self) -> Outcome:
        self.push(_Job(PartialSolution((), Vector(), (), Vector()), seed=True))
        with self.lock:
            self.stats.partial_solutions = 0
        if self.config.workers == 1:
            self._run_sequential()
        else:
            self._run_parallel()
        return self._outcome()

    def _next_job(self) -> _Job | None:
        if self.stats.cegar_steps >= self.config.max_steps:
            self.budget("CEGAR step limit")
            return None
        if any(e == "queue length limit" for e in self.budget_events):
            return None
        self.stats.cegar_steps += 1
        return heapq.heappop(self.queue)[2]

    def _run_sequential(self) -> None:
        while self.queue and self.witness is None:
            job = self._next_job()
            if job is None:
                return
            self.process(job)

    def _run_parallel(self) -> None:
        busy = 0
        stop = False
        errors: list[BaseException] = []

        def worker() -> None:
            nonlocal busy, stop
            while True:
                with self.wakeup:
                    while not self.queue and busy and not stop:
                        self.wakeup.wait()
                    if stop or self.witness is not None or (not self.queue and not busy):
                        stop = True
                        self.wakeup.notify_all()
                        return
                    job = self._next_job()
                    if job is None:
                        stop = True
                        self.wakeup.notify_all()
                        return
                    busy += 1
                try:
                    self.process(job)
                except BaseException as exc:  # surfaced in the caller
                    with self.wakeup:
                        errors.append(exc)
                        stop = True
                finally:
                    with self.wakeup:
                        busy -= 1
                        self.wakeup.notify_all()

        threads = [threading.Thread(target=worker, daemon=True) for _ in range(self.config.workers)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        if errors:
            raise errors[0]

    def _outcome(self) -> Outcome:
        if self.witness is not None:
            return Outcome(Verdict.REACHABLE, self.stats, witness=self.witness)
        report = build_report(self.problem, self.collector, self.seed_infeasible)
        if self.budget_events:
            return Outcome(Verdict.INCONCLUSIVE, self.stats, diagnostics=report, reason=self.budget_events[0])
        return Outcome(Verdict.UNREACHABLE, self.stats, diagnostics=report)


def cegar_solve(problem: ReachabilityProblem, config: EngineConfig = EngineConfig()) -> Outcome:
    """Decide the problem by refining the state equation; never answers from a budget cut."""
    return _Engine(problem, config).run()
