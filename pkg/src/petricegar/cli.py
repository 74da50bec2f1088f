"""Command-line front end.

Exit codes: 0 reachable, 1 unreachable (or witness rejected), 2 inconclusive,
3 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .cegar import EngineConfig, Outcome, Stats, Verdict, cegar_solve
from .ilp import SolveBudget
from .net import NetError, parse_net
from .oracle import OracleBudget, bfs_reach
from .problem import Mode, ProblemError, make_problem, parse_problem

EXIT_CODES = {Verdict.REACHABLE: 0, Verdict.UNREACHABLE: 1, Verdict.INCONCLUSIVE: 2}
EXIT_USAGE = 3

log = logging.getLogger("petricegar")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which would collide with "inconclusive"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pair(text: str) -> tuple[str, int]:
    name, sep, count = text.rpartition(":")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name:count, got {text!r}")
    try:
        value = int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"count must be an integer in {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"negative count in {text!r}")
    return name, value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _problem_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("net", help="net file")
    p.add_argument("--problem", help="problem file (YAML: final, mode, require)")
    p.add_argument("--final", type=_pair, action="append", default=[], metavar="PLACE:N")
    p.add_argument("--cover", action="store_true", help="cover the final marking instead of reaching it")
    p.add_argument("--require", type=_pair, action="append", default=[], metavar="T:N")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="petricegar", description="Petri net reachability via the state equation.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", help="decide reachability with the refinement engine")
    _problem_args(solve)
    solve.add_argument("--ilp-nodes", type=_positive, default=SolveBudget().max_nodes)
    solve.add_argument("--search-nodes", type=_positive, default=EngineConfig().search_nodes)
    solve.add_argument("--max-steps", type=_positive, default=EngineConfig().max_steps)
    solve.add_argument("--workers", type=_positive, default=1)
    solve.add_argument("--no-stubborn", action="store_true")
    solve.add_argument("--no-subtree-cut", action="store_true")
    solve.add_argument("--no-prune", action="store_true")
    solve.add_argument("--no-memo", action="store_true")
    solve.add_argument("--stats", action="store_true", help="print statistics in text mode")
    solve.add_argument("--format", choices=("text", "structured"), default="text")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--graph", metavar="PATH", help="write the diagnostics graph as JSON")

    oracle = sub.add_parser("oracle", help="decide reachability by explicit breadth-first search")
    _problem_args(oracle)
    oracle.add_argument("--max-markings", type=_positive, default=OracleBudget().max_markings)
    oracle.add_argument("--format", choices=("text", "structured"), default="text")

    check = sub.add_parser("check-witness", help="replay a witness file against a problem")
    _problem_args(check)
    check.add_argument("witness", help="file with one transition per line")
    return parser


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def load_problem(args):
    net = parse_net(_read(args.net))
    flags = bool(args.final or args.require or args.cover)
    if args.problem and flags:
        raise UsageError("give either --problem or --final/--require/--cover, not both")
    if args.problem:
        return parse_problem(_read(args.problem), net)
    if not flags:
        raise UsageError("no problem given: use --problem or --final/--require")
    final: dict[str, int] = {}
    for s, k in args.final:
        if s in final:
            raise UsageError(f"--final given twice for {s}")
        final[s] = k
    for t, k in args.require:
        if k < 1:
            raise UsageError(f"--require {t} needs a count of at least 1")
    return make_problem(net, final, Mode.COVER if args.cover else Mode.REACH, args.require)


def _emit_outcome(outcome: Outcome, fmt: str, show_stats: bool) -> None:
    if fmt == "structured":
        doc = outcome.to_dict()
        doc["witness"] = doc["witness"] or []
        doc["diagnostics"] = doc["diagnostics"] or {}
        print(json.dumps(doc, indent=2, sort_keys=True))
        return
    if outcome.verdict is Verdict.REACHABLE:
        for t in outcome.witness:
            print(t)
    elif outcome.verdict is Verdict.UNREACHABLE:
        print("unreachable")
        if outcome.diagnostics is not None:
            print(outcome.diagnostics.to_text())
    else:
        print(f"inconclusive: {outcome.reason}")
    if show_stats or outcome.verdict is Verdict.INCONCLUSIVE:
        out = sys.stdout if outcome.verdict is Verdict.INCONCLUSIVE else sys.stderr
        for key, value in outcome.stats.to_dict().items():
            print(f"{key}: {value}", file=out)


def cmd_solve(args) -> int:
    problem = load_problem(args)
    config = EngineConfig(
        solve_budget=SolveBudget(max_nodes=args.ilp_nodes),
        max_steps=args.max_steps,
        search_nodes=args.search_nodes,
        workers=args.workers,
        stubborn=not args.no_stubborn,
        subtree_cut=not args.no_subtree_cut,
        prune=not args.no_prune,
        memo=not args.no_memo,
        seed=args.seed,
    )
    outcome = cegar_solve(problem, config)
    _emit_outcome(outcome, args.format, args.stats)
    if args.graph and outcome.diagnostics is not None:
        with open(args.graph, "w", encoding="utf-8") as fh:
            json.dump(outcome.diagnostics.to_graph(problem.net), fh, indent=2)
    return EXIT_CODES[outcome.verdict]


def cmd_oracle(args) -> int:
    problem = load_problem(args)
    result = bfs_reach(problem, OracleBudget(max_markings=args.max_markings))
    reason = "marking budget exhausted" if result.verdict is Verdict.INCONCLUSIVE else None
    outcome = Outcome(result.verdict, Stats(), result.witness, None, reason)
    if args.format == "structured":
        doc = {"verdict": result.verdict.value, "witness": list(result.witness or ()), "explored": result.explored}
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        _emit_outcome(outcome, "text", False)
        print(f"explored: {result.explored}", file=sys.stderr)
    return EXIT_CODES[result.verdict]


def cmd_check(args) -> int:
    problem = load_problem(args)
    sequence = [line.strip() for line in _read(args.witness).splitlines() if line.strip()]
    reason = problem.check_witness(sequence)
    if reason is None:
        print("ok")
        return 0
    print(reason)
    return 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    handler = {"solve": cmd_solve, "oracle": cmd_oracle, "check-witness": cmd_check}[args.command]
    try:
        return handler(args)
    except (UsageError, NetError, ProblemError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
