"""Command-line front end.

Exit codes: 0 ok, 2 invalid input, 3 file I/O failure, 4 soundness violation
(a sampled decomposition beat a proven bound by more than 1e-6).
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import __version__
from . import errors
from .bounds import cdb_bound
from .io import EnsembleRow, MatrixFile, dumps, ensemble_csv, read_matrix_file, report_csv, report_document
from .linalg import DEFAULT_TOL
from .oracle import PRESETS, bound_gap_experiment, child_seed
from .states import random_density, random_separable

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_UNSOUND = 4

SEED_ENV = "EOFB_SEED"

_INVARIANT_NAMES = {
    errors.ParseError: "file format",
    errors.NotHermitian: "Hermiticity",
    errors.NotPSD: "positive semidefiniteness",
    errors.NotUnitTrace: "unit trace",
    errors.NonFinite: "finite entries",
    errors.WrongDimension: "dimension",
    errors.BadRank: "rank range",
}


class _Unsound(Exception):
    pass


def _invariant(exc: errors.EofbError) -> str:
    for cls in type(exc).__mro__:
        if cls in _INVARIANT_NAMES:
            return _INVARIANT_NAMES[cls]
    return "input validation"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise errors.ParseError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _load(path: str, tol: float):
    mf, digest = read_matrix_file(path)
    return mf, digest, mf.density(tol)


def cmd_analyze(args) -> int:
    mf, digest, rho = _load(args.input, args.tol)
    report = cdb_bound(rho, args.tol)
    if args.format == "csv":
        text = report_csv(report)
    else:
        text = dumps(report_document(report, __version__, digest, args.tol, mf.label)) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_random(args) -> int:
    seed = _seed(args)
    rank = 2 * args.d if args.rank is None else args.rank
    if args.separable:
        rho = random_separable(args.d, rank, seed)
        label = f"separable d={args.d} terms={rank} seed={seed}"
    else:
        rho = random_density(args.d, rank, seed)
        label = f"random d={args.d} rank={rank} seed={seed}"
    _emit(MatrixFile(args.d, rho.matrix, label).to_json(), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    _, _, rho = _load(args.input, args.tol)
    cfg = replace(PRESETS[args.budget], seed=_seed(args), workers=args.workers)
    gap = bound_gap_experiment(rho, cfg, per_channel=True, tol=args.tol)
    report = cdb_bound(rho, args.tol)
    lines = [
        f"c_db = {gap.c_db:.17g}",
        f"empirical_C = {gap.empirical_c:.17g}",
        f"gap = {gap.gap:.17g}",
    ]
    for (i, j), res in zip(report.channels, gap.channel_attainment):
        lines.append(f"attainment c_{i}{j} = {res:.17g}")
    for v in gap.violations:
        lines.append(f"VIOLATION {v}")
    print("\n".join(lines))
    return EXIT_OK if gap.sound else EXIT_UNSOUND


def _ensemble_row(job) -> tuple[EnsembleRow, tuple[str, ...]]:
    index, d, rank, seed, tol, budget = job
    rho = random_density(d, rank, child_seed(seed, index))
    report = cdb_bound(rho, tol)
    emp = gap = None
    violations: tuple[str, ...] = ()
    if budget is not None:
        cfg = replace(PRESETS[budget], seed=child_seed(seed, 10_000 + index))
        res = bound_gap_experiment(rho, cfg, per_channel=False, tol=tol)
        emp, gap, violations = res.empirical_c, res.gap, res.violations
    row = EnsembleRow(index, report.rank, report.c_ij, report.c_db, report.eof_lower, emp, gap)
    return row, violations


def cmd_ensemble(args) -> int:
    if args.count < 1:
        raise errors.BadSize(f"--count must be >= 1, got {args.count}")
    rank = 2 * args.d if args.rank is None else args.rank
    if not 1 <= rank <= 2 * args.d:
        raise errors.BadRank(f"rank must be in [1, {2 * args.d}] for d={args.d}, got {rank}")
    seed = _seed(args)
    budget = args.budget if args.verify else None
    jobs = [(k, args.d, rank, seed, args.tol, budget) for k in range(args.count)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_ensemble_row, jobs))
    else:
        results = [_ensemble_row(job) for job in jobs]
    _emit(ensemble_csv(args.d, [r for r, _ in results]), args.out)
    bad = [(row.index, v) for row, vs in results for v in vs]
    for index, v in bad:
        print(f"VIOLATION row {index}: {v}", file=sys.stderr)
    return EXIT_UNSOUND if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eofb", description="Concurrence and EOF bounds for qubit-qudit density matrices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="bound report for a matrix file")
    a.add_argument("--input", required=True)
    a.add_argument("--tol", type=float, default=DEFAULT_TOL)
    a.add_argument("--format", choices=("json", "csv"), default="json")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("random", help="write a seeded random matrix file")
    r.add_argument("--d", type=int, required=True)
    r.add_argument("--rank", type=int, help="rank, or number of product terms with --separable (default 2d)")
    r.add_argument("--seed", type=int)
    r.add_argument("--separable", action="store_true")
    r.add_argument("--out")
    r.set_defaults(func=cmd_random)

    v = sub.add_parser("verify", help="compare the bound against a stochastic search")
    v.add_argument("--input", required=True)
    v.add_argument("--budget", choices=sorted(PRESETS), default="default")
    v.add_argument("--seed", type=int)
    v.add_argument("--tol", type=float, default=DEFAULT_TOL)
    v.add_argument("--workers", type=int, default=1)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("ensemble", help="CSV of bounds over seeded random states")
    e.add_argument("--d", type=int, required=True)
    e.add_argument("--count", type=int, required=True)
    e.add_argument("--rank", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--out")
    e.add_argument("--verify", action="store_true", help="fill empirical_c and gap from a search")
    e.add_argument("--budget", choices=sorted(PRESETS), default="quick")
    e.add_argument("--tol", type=float, default=DEFAULT_TOL)
    e.add_argument("--workers", type=int, default=1)
    e.set_defaults(func=cmd_ensemble)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except errors.EofbError as exc:
        print(f"eofb: invalid input ({_invariant(exc)}): {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"eofb: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
