"""Petri net reachability through the state equation with counterexample-guided refinement."""

from .cegar import EngineConfig, Outcome, Verdict, cegar_solve
from .ilp import LinearSystem, Row, SolveBudget, build_state_equation, omega_compare, solve_omega_min
from .net import PetriNet, Vector, enabled, fire, fire_sequence, incidence, parikh, parse_net, render_net
from .oracle import OracleBudget, bfs_reach, enumerate_solutions
from .problem import Mode, ReachabilityProblem, make_problem, parse_problem

__all__ = [
    "EngineConfig", "Outcome", "Verdict", "cegar_solve",
    "LinearSystem", "Row", "SolveBudget", "build_state_equation", "omega_compare", "solve_omega_min",
    "PetriNet", "Vector", "enabled", "fire", "fire_sequence", "incidence", "parikh", "parse_net", "render_net",
    "OracleBudget", "bfs_reach", "enumerate_solutions",
    "Mode", "ReachabilityProblem", "make_problem", "parse_problem",
]
