"""Command-line front end: ``verify``, ``search`` and ``oracle-check``.

Exit codes: 0 success, 1 usage or configuration error, 2 a bound violation
or oracle disagreement was detected.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
import time
from pathlib import Path
from typing import Sequence

from .harness import (
    ALL_BOUNDS,
    TrialConfig,
    oracle_checks,
    parse_bound_set,
    run_trials,
    trial_inputs,
    worker_count,
)
from .linalg import BRUTEFORCE_MAX_N
from .products import InvalidSpecError
from .search import SearchProblem, minimize_gap
from .serialize import load_spec, report_line, save_matrix, write_lines

log = logging.getLogger("causalprod")

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    if args.strict:
        raise UsageError("--seed is required with --strict")
    seed = time.time_ns() % 2**32
    log.warning("no --seed given; using time-derived seed %d", seed)
    return seed


def _parse_rank(text: str) -> str | int:
    if text in ("full", "random"):
        return text
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"--rank must be full, random or an integer, got {text!r}") from None


_SPEC_CHOICES = {
    "hadamard": "hadamard",
    "jury": "jury",
    "random": "random_custom",
    "random-fixed": "random_all_fixed",
    "random-nonfixed": "random_none_fixed",
}


def _parse_spec(text: str, n: int):
    if text.startswith("file:"):
        try:
            spec = load_spec(text[len("file:"):])
        except (OSError, ValueError) as exc:
            raise UsageError(f"invalid spec file: {exc}") from None
        if spec.n != n:
            raise UsageError(f"spec file has n = {spec.n} but --n is {n}")
        return spec
    if text not in _SPEC_CHOICES:
        raise UsageError(
            f"--spec must be one of {', '.join(_SPEC_CHOICES)} or file:PATH, got {text!r}"
        )
    return _SPEC_CHOICES[text]


@contextlib.contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def cmd_verify(args) -> int:
    try:
        bound_set = parse_bound_set(args.bounds)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cfg = TrialConfig(
        n=args.n,
        trials=args.trials,
        master_seed=_resolve_seed(args),
        rank_policy=_parse_rank(args.rank),
        spec_policy=_parse_spec(args.spec, args.n),
        regularization_eps=args.eps,
        bound_set=bound_set,
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    persist = args.counterexample_dir
    records, summary = run_trials(cfg, persist_dir=persist)
    with _output(args.out) as out:
        write_lines(
            (report_line("trial", r.to_dict(timing=args.timing)) for r in records), out
        )
        write_lines([report_line("summary", summary)], out)
    return EXIT_VIOLATION if summary["failed"] else EXIT_OK


def cmd_search(args) -> int:
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    problem = SearchProblem(
        n=args.n,
        bound="jury_main_bound",
        restarts=args.restarts,
        budget=args.budget,
        seed=_resolve_seed(args),
        normalization=args.normalization,
        diagonal_only=args.diagonal_only,
    )
    try:
        problem.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = minimize_gap(problem, workers=worker_count())
    payload = {
        "problem": {
            "n": problem.n,
            "bound": problem.bound,
            "restarts": problem.restarts,
            "budget": problem.budget,
            "seed": problem.seed,
            "normalization": problem.normalization,
            "diagonal_only": problem.diagonal_only,
        },
        "result": result.to_dict(),
    }
    with _output(args.out) as out:
        write_lines([report_line("search", payload)], out)
    if args.pair_out:
        save_matrix(result.a, f"{args.pair_out}_A.json")
        save_matrix(result.b, f"{args.pair_out}_B.json")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    if args.n > BRUTEFORCE_MAX_N:
        raise UsageError(f"oracle too large: --n {args.n} > {BRUTEFORCE_MAX_N}")
    if args.n < 1 or args.trials < 1:
        raise UsageError("--n and --trials must be >= 1")
    cfg = TrialConfig(
        n=args.n,
        trials=args.trials,
        master_seed=_resolve_seed(args),
        rank_policy=_parse_rank(args.rank),
        spec_policy=_parse_spec(args.spec, args.n),
        bound_set=("oracle",),
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lines, failures = [], 0
    totals: dict[str, int] = {}
    for i in range(cfg.trials):
        seed, a, b, spec, v = trial_inputs(cfg, i)
        flags, errors = oracle_checks(a, b, spec, v)
        failures += sum(1 for ok in flags.values() if not ok)
        for name, ok in flags.items():
            totals[name] = totals.get(name, 0) + int(ok)
        lines.append(
            report_line(
                "oracle",
                {"trial_index": i, "seed": seed, "spec": spec.to_dict(),
                 "flags": flags, "errors": errors},
            )
        )
    summary = {"trials": cfg.trials, "passed": totals, "failures": failures,
               "config": cfg.describe()}
    lines.append(report_line("summary", summary))
    with _output(args.out) as out:
        write_lines(lines, out)
    return EXIT_VIOLATION if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalprod",
        description="Verify determinant inequalities for Hadamard, Jury and causal products.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials_default):
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--trials", type=int, default=trials_default)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--strict", action="store_true", help="require an explicit --seed")
        p.add_argument("--out", default=None, help="report file (default stdout)")

    verify = sub.add_parser("verify", help="randomized verification of the bounds")
    common(verify, 100)
    verify.add_argument("--spec", default="jury",
                        help="hadamard|jury|random|random-fixed|random-nonfixed|file:PATH")
    verify.add_argument("--bounds", default="all",
                        help=f"comma-separated subset of: {', '.join(ALL_BOUNDS)}")
    verify.add_argument("--eps", type=float, default=0.0,
                        help="regularization for near-singular inputs (0 = skip them)")
    verify.add_argument("--rank", default="full", help="full|random|R")
    verify.add_argument("--counterexample-dir", default="counterexamples")
    verify.add_argument("--timing", action="store_true",
                        help="include wall times (breaks byte-identical reruns)")
    verify.set_defaults(func=cmd_verify)

    search = sub.add_parser("search", help="minimize the Jury main-bound gap")
    search.add_argument("--n", type=int, required=True)
    search.add_argument("--restarts", type=int, default=10)
    search.add_argument("--budget", type=int, default=2000)
    search.add_argument("--seed", type=int, default=None)
    search.add_argument("--strict", action="store_true")
    search.add_argument("--diagonal-only", action="store_true")
    search.add_argument("--normalization", choices=["trace_one", "det_one"], default="trace_one")
    search.add_argument("--out", default=None)
    search.add_argument("--pair-out", default=None,
                        help="write best pair to PREFIX_A.json and PREFIX_B.json")
    search.set_defaults(func=cmd_search)

    oracle = sub.add_parser("oracle-check", help="definition-versus-oracle comparisons")
    common(oracle, 50)
    oracle.add_argument("--spec", default="random")
    oracle.add_argument("--rank", default="full")
    oracle.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (UsageError, InvalidSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
