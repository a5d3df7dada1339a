"""Command-line front end: ``agparse parse`` and ``agparse oracle``.

Exit status: 0 recognised (or oracle success), 2 not recognised, 1 error,
64 bad usage.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from .acfg import GrammarError, OracleError, oracle_generate
from .io import FORMATS, GrammarSyntaxError, load_grammar_file
from .minimalist import MinimalistGrammar
from .parser import ParseAborted, run_chartparser
from .semiring import SEMIRINGS

EXIT_OK, EXIT_ERROR, EXIT_REJECTED, EXIT_USAGE = 0, 1, 2, 64


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _ArgumentParser(prog="agparse", description="Chart parsing for abstract and minimalist grammars.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log parser statistics to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def grammar_args(p):
        p.add_argument("--grammar", required=True, metavar="FILE")
        p.add_argument("--format", choices=FORMATS, help="grammar format (default: detect)")

    p = sub.add_parser("parse", help="parse one sentence")
    grammar_args(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="TOKENS", help="whitespace-separated tokens")
    src.add_argument("--stdin", action="store_true", help="read the tokens from standard input")
    p.add_argument("--semiring", choices=("inside", "viterbi", "bool"), default="inside")
    p.add_argument("--output", choices=("json", "tree", "score"), default="json")
    p.add_argument("--tol", type=float, default=1e-12, help="convergence tolerance in log space")
    p.add_argument("--budget", type=int, default=10**6, help="maximum number of chart items")

    p = sub.add_parser("oracle", help="enumerate string probabilities by generation")
    grammar_args(p)
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=10_000)
    return ap


def _format_score(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return f"{value:.12g}"


def cmd_parse(args, out, err) -> int:
    grammar = load_grammar_file(args.grammar, args.format)
    text = sys.stdin.read() if args.stdin else args.input
    tokens = text.split()
    try:
        forest = run_chartparser(grammar, tokens, SEMIRINGS[args.semiring], tol=args.tol, budget=args.budget)
    except ParseAborted as exc:
        print(f"error: parse aborted: {exc} ({exc.forest.stats['items']} items built)", file=err)
        return EXIT_ERROR
    for msg in forest.diagnostics:
        print(f"warning: {msg}", file=err)
    if args.output == "json":
        print(forest.to_json(), file=out)
    elif args.output == "score":
        print(_format_score(forest.score_value()), file=out)
    else:
        print(f"# recognized: {'true' if forest.recognized else 'false'}", file=out)
        print(f"# score: {_format_score(forest.score_value())}", file=out)
        print(forest.best().to_bracketed() if forest.recognized else "(no parse)", file=out)
    return EXIT_OK if forest.recognized else EXIT_REJECTED


def cmd_oracle(args, out, err) -> int:
    grammar = load_grammar_file(args.grammar, args.format)
    if isinstance(grammar, MinimalistGrammar):
        print("error: the generation oracle needs an acfg or mcfg grammar", file=err)
        return EXIT_ERROR
    result = oracle_generate(grammar, args.max_len, args.max_steps)
    for tokens in sorted(result.probabilities):
        print(f"{' '.join(tokens)}\t{result.probabilities[tokens]:.12g}", file=out)
    print(f"# residual <= {result.residual:.6g} after {result.steps} steps", file=out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=err)
    command = cmd_parse if args.command == "parse" else cmd_oracle
    try:
        return command(args, out, err)
    except (GrammarError, GrammarSyntaxError, OracleError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
