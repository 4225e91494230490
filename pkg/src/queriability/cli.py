"""Command line interface.

Exit status: 0 on success, 1 on invalid input, 2 when a search or reasoning
budget was exhausted.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .fitness import fitness_of, parse_order
from .harness import APPROACHES, CellError, load_bundle, run_matrix
from .parser import parse_class_expression, parse_ontology
from .query_space import best_queries
from .reasoner import BudgetExceeded, certain_answers, hierarchy_lines, saturate
from .report import FORMATS, render_report

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_BUDGET = 2

log = logging.getLogger("queriability")


def _load_ontology(path: str):
    return parse_ontology(Path(path).read_text(encoding="utf-8"))


def cmd_classify(args: argparse.Namespace) -> int:
    idx = saturate(_load_ontology(args.ontology))
    print("\n".join(hierarchy_lines(idx)))
    return EXIT_OK


def cmd_answer(args: argparse.Namespace) -> int:
    idx = saturate(_load_ontology(args.ontology))
    q = parse_class_expression(args.query)
    for ind in sorted(certain_answers(idx, q).individuals):
        print(ind)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    bundle = load_bundle(args.bundle)
    rep = run_matrix(bundle, args.mode, parse_order(args.order))
    sys.stdout.write(render_report(rep, args.format))
    if rep.exhausted:
        log.warning("budget exhausted in at least one cell")
        return EXIT_BUDGET
    if rep.errors:
        return EXIT_INVALID
    return EXIT_OK


def cmd_search_best(args: argparse.Namespace) -> int:
    bundle = load_bundle(args.bundle)
    r = bundle.request(args.request)
    ma = bundle.approach(args.approach)
    res = best_queries(r, ma, bundle.vocabulary(r.id, ma.id), parse_order(args.order))
    for q in res.sorted_queries():
        print(f"{fitness_of(q)}\t{q}")
    if not res.queries:
        print(f"no correct query found ({res.examined} candidates examined)", file=sys.stderr)
    if res.exhausted_budget:
        print(f"candidate cap reached after {res.examined} candidates", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="queriability",
        description="Compare how easily information requests can be queried under "
                    "different modelling approaches.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="print the subsumption hierarchy of an ontology")
    c.add_argument("ontology")
    c.set_defaults(func=cmd_classify)

    a = sub.add_parser("answer", help="print the certain answers of a class expression")
    a.add_argument("ontology")
    a.add_argument("query", help="class expression, e.g. '(and Image (some shows Neoplasm))'")
    a.set_defaults(func=cmd_answer)

    bundle_help = "bundle directory (default: the shipped fixture)"
    order_help = "fitness order: lex or sum:w1,w2,w3"

    e = sub.add_parser("evaluate", help="evaluate all requests across MA1-MA5")
    e.add_argument("--bundle", default=None, help=bundle_help)
    e.add_argument("--mode", choices=("transcribed", "searched"), default="transcribed")
    e.add_argument("--order", default="lex", help=order_help)
    e.add_argument("--format", choices=FORMATS, default="md")
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("search-best", help="find the best queries for one request")
    s.add_argument("--bundle", default=None, help=bundle_help)
    s.add_argument("--request", required=True)
    s.add_argument("--approach", required=True, choices=APPROACHES)
    s.add_argument("--order", default="lex", help=order_help)
    s.set_defaults(func=cmd_search_best)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except CellError as exc:
        if isinstance(exc.__cause__, BudgetExceeded):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
