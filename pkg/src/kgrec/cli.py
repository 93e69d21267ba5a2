"""kgrec command line: validate KG files, recommend, dump proof graphs, serve.

JSON goes to stdout, diagnostics to stderr. Exit codes: 0 success,
1 validation/runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .grounding import GroundingError, Limits, ground, to_dot
from .kg import KGError, KnowledgeGraph, replay_feedback_log
from .ppr import PPRParams
from .recommend import SolverParams, recommend, to_api
from .rules import RuleError, default_rules, parse_query, parse_rules


def _add_kg_flags(sub, prefix: str = ""):
    sub.add_argument(f"--{prefix}entities", required=True, metavar="FILE",
                     help="entities TSV (id, kind, name)")
    sub.add_argument(f"--{prefix}edges", required=True, metavar="FILE",
                     help="edges TSV (src, relation, dst)")


def _add_solver_flags(sub):
    sub.add_argument("--alpha", type=float, default=0.2, help="PPR restart probability")
    sub.add_argument("--eps", type=float, default=1e-6, help="push residual threshold")
    sub.add_argument("--tol", type=float, default=1e-8, help="power-iteration L1 tolerance")
    sub.add_argument("--max-iter", type=int, default=1000, help="power-iteration cap")
    sub.add_argument("--ppr-method", choices=("power", "push"), default="power")
    sub.add_argument("--max-depth", type=int, default=6,
                     help="grounding budget: rule expansions per path")
    sub.add_argument("--max-nodes", type=int, default=20000,
                     help="grounding budget: total proof states")


def _solver_params(args) -> SolverParams:
    return SolverParams(
        limits=Limits(max_depth=args.max_depth, max_nodes=args.max_nodes),
        ppr=PPRParams(
            alpha=args.alpha,
            method=args.ppr_method,
            tol=args.tol,
            max_iter=args.max_iter,
            eps=args.eps,
        ),
    )


def _load_graph(entities_path, edges_path, feedback_path=None) -> KnowledgeGraph:
    kg = KnowledgeGraph.load(entities_path, edges_path)
    if feedback_path:
        replay_feedback_log(kg, feedback_path)
    return kg


def _load_rules(path):
    if not path:
        return default_rules()
    with open(path, encoding="utf-8") as f:
        return parse_rules(f.read())


def cmd_validate(args) -> int:
    kg = _load_graph(args.entities, args.edges)
    print(f"{len(kg.entities)} entities, {kg.edge_count} edges")
    return 0


def cmd_recommend(args) -> int:
    kg = _load_graph(args.entities, args.edges, args.feedback)
    rules = _load_rules(args.rules)
    if args.user not in kg.entities:
        print("[]")  # unknown user: nothing to recommend
        return 0
    recs = recommend(args.user, args.k, kg, rules, _solver_params(args))
    print(json.dumps(to_api(kg, recs), indent=2))
    return 0


def cmd_ground(args) -> int:
    kg = _load_graph(args.entities, args.edges, args.feedback)
    rules = _load_rules(args.rules)
    query = parse_query(args.query)
    pg = ground(query, rules, kg, Limits(max_depth=args.max_depth, max_nodes=args.max_nodes))
    with open(args.dot, "w", encoding="utf-8") as f:
        f.write(to_dot(pg, rules))
    print(
        f"{len(pg)} states, {len(pg.solutions)} solutions, "
        f"truncated={'yes' if pg.truncated else 'no'} -> {args.dot}",
        file=sys.stderr,
    )
    return 0


def cmd_serve(args) -> int:
    import signal

    import uvicorn

    from .service import create_app

    kg = _load_graph(args.kg_entities, args.kg_edges)
    if args.feedback_log:
        try:
            replay_feedback_log(kg, args.feedback_log)
        except FileNotFoundError:
            pass  # first run: the log is created on first write
    rules = _load_rules(args.rules)
    app = create_app(kg, rules, _solver_params(args), feedback_log=args.feedback_log,
                     static_dir=args.ui)
    # uvicorn re-raises SIGTERM after its graceful shutdown with the prior
    # handler restored; exit 0 instead of dying by signal (the log is
    # flushed per write, so the drain already persisted everything)
    signal.signal(signal.SIGTERM, lambda _sig, _frame: sys.exit(0))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgrec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load and check KG files, print counts")
    _add_kg_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("recommend", help="one-shot recommendations as JSON")
    _add_kg_flags(p)
    p.add_argument("--feedback", metavar="FILE", help="feedback JSONL log to replay")
    p.add_argument("--rules", metavar="FILE", help="rule program (default: built-in)")
    p.add_argument("--user", required=True)
    p.add_argument("--k", type=int, default=10)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("ground", help="ground a query and dump the proof graph as DOT")
    _add_kg_flags(p)
    p.add_argument("--feedback", metavar="FILE", help="feedback JSONL log to replay")
    p.add_argument("--rules", metavar="FILE", help="rule program (default: built-in)")
    p.add_argument("--query", required=True, help='e.g. "willLike(alice, E, M)"')
    p.add_argument("--dot", required=True, metavar="FILE", help="output DOT path")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--kg-entities", required=True, metavar="FILE")
    p.add_argument("--kg-edges", required=True, metavar="FILE")
    p.add_argument("--feedback-log", metavar="FILE", help="append-only feedback JSONL")
    p.add_argument("--rules", metavar="FILE", help="rule program (default: built-in)")
    p.add_argument("--ui", metavar="DIR", help="serve a static web client from DIR at /")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (KGError, RuleError, GroundingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
