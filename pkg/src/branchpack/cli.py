"""Command-line entry point.

Exit codes: 0 success or condition holds, 1 infeasible or a mismatch,
2 an operational error (bad input, capacity exceeded).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus, jsonio
from .errors import BranchpackError


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BranchpackError(f"cannot read {path}: {exc.strerror}") from None


def _emit(text: str, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _error(msg: str, out) -> int:
    print(f"error: {msg}", file=sys.stderr)
    _emit(jsonio.dumps({"status": "error", "message": msg}), out)
    return 2


def cmd_check(args) -> int:
    inst = jsonio.load_instance(_read(args.inp))
    code, res = jsonio.run_check(inst, args.condition)
    _emit(jsonio.dumps(res), args.out)
    return code


def cmd_solve(args) -> int:
    inst = jsonio.load_instance(_read(args.inp))
    code, res = jsonio.run_solve(inst, args.mode)
    _emit(jsonio.dumps(res), args.out)
    return code


def cmd_replay(args) -> int:
    inst = jsonio.load_instance(_read(args.inp))
    given = _read(args.result)
    try:
        result = json.loads(given)
    except json.JSONDecodeError as exc:
        raise BranchpackError(f"malformed result file: {exc}") from None
    _, res = jsonio.run_replay(inst, result)
    text = jsonio.dumps(res)
    _emit(text, args.out)
    if text != given:
        print("replayed result differs from the given file", file=sys.stderr)
        return 1
    return 0


def cmd_corpus(args) -> int:
    tally = corpus.run_corpus(args.seed, args.count, max_v=args.max_v, profile=args.profile,
                              budget=args.budget, mutate=args.mutate)
    print(tally.table())
    for problem, tag, verdicts in tally.mismatch_tags[:20]:
        print(f"mismatch: {problem} on instance {tag}: {verdicts}")
    if args.out:
        report = {
            "seed": args.seed, "count": args.count,
            "rows": {k: dict(v) for k, v in sorted(tally.rows.items())},
            "mismatches": [[t, i, list(v)] for t, i, v in tally.mismatch_tags],
            "invalid_solutions": len(tally.invalid_solutions),
            "bad_certificates": len(tally.bad_certificates),
        }
        Path(args.out).write_text(jsonio.dumps(report), encoding="utf-8")
    bad = tally.mismatches or tally.invalid_solutions or tally.bad_certificates
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="branchpack", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate one feasibility condition")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--condition", required=True, choices=jsonio.CONDITIONS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="solve an instance and write a solution or certificate")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--mode", choices=jsonio.MODES, help="overrides the instance's mode")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("replay", help="rebuild a solution from its step log")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--result", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("corpus", help="random solver / checker / brute-force comparison")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--max-v", type=int, default=4)
    p.add_argument("--profile", choices=sorted(corpus.PROFILES))
    p.add_argument("--budget", type=int, help="node limit for each brute-force search")
    p.add_argument("--mutate", choices=corpus.MUTATIONS,
                   help="break one checker on purpose to test the harness")
    p.add_argument("--out")
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BranchpackError as exc:
        return _error(str(exc), getattr(args, "out", None))
    except (KeyError, TypeError, ValueError) as exc:
        return _error(f"malformed input: {exc!r}", getattr(args, "out", None))


if __name__ == "__main__":
    sys.exit(main())
