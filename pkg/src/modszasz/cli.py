"""Command line front end.

    modszasz eval --fn sin --seq psum:0.5 --n 40 --x 1.2
    modszasz moments --rmax 8 --dump-table
    modszasz converge --config converge.cfg --out results/converge.csv

Exit codes: 0 success, 1 evaluation error, 2 config error.
``MODSZASZ_OUTPUT_DIR`` (if set) redirects study output files into that directory.
"""

import argparse
import os
import sys
from pathlib import Path

from .errors import ConfigError, DomainError, EvaluationError, TruncationError
from .experiments import load_config, run
from .moments import build_table
from .operator import EvalConfig, apply, parse_function
from .sequences import parse_sequence

OUTPUT_DIR_ENV = "MODSZASZ_OUTPUT_DIR"

STUDY_COMMANDS = {
    "converge": "converge",
    "voronovskaja": "voronovskaja",
    "direct": "direct_bound",
    "alpha": "alpha_inverse",
    "figures": "figures",
    "audit": "moment_audit",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="modszasz", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate S_n(f; x)")
    ev.add_argument("--fn", required=True, help="monomial:<i> | exp | sin | absshift:<c>")
    ev.add_argument("--seq", required=True, help="classical | power:<m> | geometric:<r> | psum:<p> | table:<v,...>")
    ev.add_argument("--n", type=int, required=True)
    ev.add_argument("--x", type=float, required=True)
    trunc = ev.add_mutually_exclusive_group()
    trunc.add_argument("--tol", type=float, default=1e-12)
    trunc.add_argument("--fixed-k", type=int, default=None)

    mo = sub.add_parser("moments", help="raw-moment coefficient table")
    mo.add_argument("--rmax", type=int, required=True)
    mo.add_argument("--dump-table", action="store_true", help="write the table as CSV to stdout")

    for name in STUDY_COMMANDS:
        st = sub.add_parser(name, help=f"run the {STUDY_COMMANDS[name]} study")
        st.add_argument("--config", required=True)
        st.add_argument("--out", required=True)
    return parser


def _cmd_eval(args):
    f = parse_function(args.fn)
    seq = parse_sequence(args.seq)
    try:
        cfg = EvalConfig(tol=args.tol, fixed_k=args.fixed_k)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    print(format(apply(f, seq, args.n, args.x, cfg), ".17g"))


def table_csv(table):
    lines = ["r," + ",".join(str(j) for j in range(1, table.r_max + 1))]
    for r in range(1, table.r_max + 1):
        cells = [str(table.a[r][j]) if j <= r else "" for j in range(1, table.r_max + 1)]
        lines.append(f"{r}," + ",".join(cells))
    return "\n".join(lines) + "\n"


def _cmd_moments(args):
    if args.rmax < 1:
        raise ConfigError("--rmax must be at least 1")
    table = build_table(args.rmax)
    if args.dump_table:
        sys.stdout.write(table_csv(table))
        return
    for r in range(1, table.r_max + 1):
        terms = " + ".join(f"{c} x^{j} b^{e}" for j, c, e in table.polynomial(r).terms)
        print(f"S_n(t^{r}; x) = {terms}")


def _output_path(out):
    override = os.environ.get(OUTPUT_DIR_ENV)
    return Path(override) / Path(out).name if override else Path(out)


def _cmd_study(args):
    study = STUDY_COMMANDS[args.command]
    out = _output_path(args.out)
    spec = load_config(args.config, study=study)
    report = run(spec)
    for path in report.write(out):
        print(path)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "eval":
            _cmd_eval(args)
        elif args.command == "moments":
            _cmd_moments(args)
        else:
            _cmd_study(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, EvaluationError, TruncationError) as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
