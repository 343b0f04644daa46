"""Command-line front end.

Exit codes: 0 no inconsistency found, 1 confirmed witness, 2 usage or
input error, 3 resource or time limit.
"""
from __future__ import annotations

import argparse
import sys

from .consistency import CheckTimeout, Session, check_partial, check_partial_rt, check_rt
from .logic import StructuralError
from .parser import RequirementFileError, parse_requirements
from .report import build_report, to_json, to_text
from .semantics import DEFAULT_MAX_NODES, ResourceLimitError

EXIT_OK, EXIT_WITNESS, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rtcheck",
        description="Check a set of real-time requirements for rt-inconsistencies.",
    )
    p.add_argument("file", help="requirement file")
    p.add_argument("--algorithm", choices=("rt", "partial", "partial-rt"), default="rt")
    p.add_argument("--n", type=_positive, default=2, help="largest subset size (rt, partial-rt)")
    p.add_argument("--alpha", type=_positive, default=40, help="search horizon (partial, partial-rt)")
    p.add_argument("--beta", type=_positive, default=10, help="extra horizon for the common continuation (partial)")
    p.add_argument("--depth", type=_positive, default=None, help="bound the rt search to traces of this length")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--max-nodes", type=_positive, default=DEFAULT_MAX_NODES)
    p.add_argument("--seed-order", choices=("default", "file"), default="default",
                   help="start subsets: enumerated in index order, or read from --subsets")
    p.add_argument("--subsets", metavar="PATH",
                   help="one start subset per line, requirement names separated by commas or spaces")
    p.add_argument("--completion", choices=("to-trap", "to-self"), default="to-trap",
                   help="how explicit automata are completed")
    p.add_argument("--timeout", type=float, default=None, help="seconds before giving up (exit 3)")
    p.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    return p


def read_subsets(path: str) -> list[list[str]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].replace(",", " ").split()
            if line:
                out.append(line)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rs = parse_requirements(args.file, args.completion)
    except (OSError, RequirementFileError) as e:
        print(f"rtcheck: {args.file}: {e}", file=sys.stderr)
        return EXIT_USAGE
    multi = [r.name for r in rs if len(r.automaton.initial) != 1]
    if multi:
        print(f"rtcheck: requirement(s) with several initial states are not supported: {', '.join(multi)}",
              file=sys.stderr)
        return EXIT_USAGE

    seeds = None
    if args.seed_order == "file":
        if not args.subsets:
            parser.error("--seed-order file requires --subsets PATH")
        try:
            seeds = read_subsets(args.subsets)
            for sub in seeds:
                rs.indices(sub)
        except OSError as e:
            print(f"rtcheck: {e}", file=sys.stderr)
            return EXIT_USAGE
        except KeyError as e:
            print(f"rtcheck: unknown requirement {e} in {args.subsets}", file=sys.stderr)
            return EXIT_USAGE

    session = Session(rs, max_nodes=args.max_nodes, timeout=args.timeout)
    try:
        if args.algorithm == "rt":
            if args.n < 2:
                parser.error("--n must be at least 2 for the rt algorithm")
            verdict = check_rt(rs, args.n, args.depth, seeds=seeds, session=session)
        elif args.algorithm == "partial":
            verdict = check_partial(rs, args.alpha, args.beta, seeds=seeds, session=session)
        else:
            verdict = check_partial_rt(rs, args.alpha, args.n, seeds=seeds, session=session)
        doc = build_report(rs, verdict, session, timing=args.timing)
    except ResourceLimitError as e:
        print(f"rtcheck: {e}", file=sys.stderr)
        return EXIT_LIMIT
    except CheckTimeout as e:
        print(f"rtcheck: {e}", file=sys.stderr)
        return EXIT_LIMIT
    except (ValueError, StructuralError) as e:
        print(f"rtcheck: {e}", file=sys.stderr)
        return EXIT_USAGE

    print(to_json(doc) if args.format == "json" else to_text(doc))
    return EXIT_WITNESS if verdict.inconsistent else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
