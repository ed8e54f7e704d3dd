"""Command-line driver: ``peci {infer,bench,sweep-k,sweep-T,stability,gen,theory}``.

Exit codes: 0 success, 1 runtime/data error, 2 undecided (``infer`` only),
64 usage error.  All randomness flows from ``--seed``; output is identical
for any ``--workers`` value.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
import warnings
from pathlib import Path


from . import __version__
from .core import Direction, igci_score
from .datagen import GP_PRESETS, ExpGenParams, GpGenParams, gen_exp_pairs, gen_gp_pairs, write_pair_file
from .dataio import ResultRecord, find_pair_files, load_metadata, load_pair_file, write_results
from .ensemble import (
    EnsembleConfig,
    WeightingScheme,
    decide,
    default_k_schedule,
    default_workers,
    ensemble_deltas,
    flip_count,
    prefix_replay,
    run_ensemble,
)
from .errors import PeciError, Saturated
from .sweep import run_sweep
from .theory import (
    base_error_rate,
    best_k,
    corollary_conditions,
    critical_ensemble_size,
    ensemble_error_bound,
    estimate_c,
)

logger = logging.getLogger("peci")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNDECIDED = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    """``"10,20,50"`` or ``"10:100:10"`` (inclusive stop)."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            if len(bits) != 3 or bits[2] <= 0:
                raise argparse.ArgumentTypeError(f"bad range {part!r}, expected start:stop:step")
            out.extend(range(bits[0], bits[1] + 1, bits[2]))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2^64)")
    return v


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt(v: float) -> str:
    return repr(float(v))


def _ensemble_args(p: argparse.ArgumentParser, T: int = 100) -> None:
    p.add_argument("--k", type=int, default=None, help="subsample size (default: size schedule of m)")
    p.add_argument("--T", type=_positive, default=T, help=f"number of tasks (default {T})")
    p.add_argument("--weighting", choices=[w.value for w in WeightingScheme], default="majority")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--workers", type=_positive, default=None, help="worker processes (env PECI_WORKERS, default 1)")


def _workers(args) -> int:
    return args.workers if args.workers is not None else default_workers()


# --------------------------------------------------------------------- infer


def cmd_infer(args) -> int:
    pairs = load_pair_file(args.file).normalized()
    m = len(pairs)
    k = args.k if args.k is not None else default_k_schedule(m)
    config = EnsembleConfig(k=k, T=args.T, weighting=WeightingScheme(args.weighting), seed=args.seed)
    full = igci_score(pairs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = run_ensemble(pairs, config, workers=_workers(args))
    votes = result.votes
    lines = [
        f"m: {m}",
        f"e_x: {_fmt(full.e_x)}",
        f"e_y: {_fmt(full.e_y)}",
        f"base: {full.decision.label}",
        f"ensemble: k={k} T={config.T} weighting={config.weighting.value} seed={config.seed}",
        f"votes: positive={int((votes > 0).sum())} negative={int((votes < 0).sum())} "
        f"zero={int((votes == 0).sum())} degenerate={result.degenerate_tasks}",
        f"vote_sum: {_fmt(result.vote_sum)}",
        f"decision: {result.direction.label}",
    ]
    if args.theory:
        truth = Direction.parse(args.truth) if args.truth else result.direction
        if truth is Direction.UNDECIDED:
            lines.append("theory: unavailable (no direction to condition on)")
        else:
            params = estimate_c(pairs, truth)
            source = "given" if args.truth else "inferred"
            lines += [
                f"theory_direction: {truth.label} ({source})",
                f"c_hat: {_fmt(params.c)}",
                f"base_error_rate: {_fmt(base_error_rate(params.c, m))}",
                f"ensemble_error_bound: {_fmt(ensemble_error_bound(params.c, k, config.T))}",
            ]
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_UNDECIDED if result.direction is Direction.UNDECIDED else EXIT_OK


# --------------------------------------------------------------------- bench

BENCH_METHODS = (
    ("peci-majority", WeightingScheme.MAJORITY),
    ("wpeci-sigmoid", WeightingScheme.SIGMOID),
    ("wpeci-tanh", WeightingScheme.TANH),
)


def cmd_bench(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        raise UsageError(f"{directory} is not a directory")
    meta_path = Path(args.meta) if args.meta else directory / "pairmeta.txt"
    files = find_pair_files(directory)
    if not files:
        raise PeciError(f"no pair files (pair<id>.txt) in {directory}")
    meta = load_metadata(meta_path)
    records: list[ResultRecord] = []
    weights: dict[str, float] = {}
    skipped: list[str] = []
    workers = _workers(args)
    for pid in sorted(files):
        if pid not in meta:
            skipped.append(pid)
            continue
        truth, weight = meta[pid]
        try:
            pairs = load_pair_file(files[pid]).normalized()
        except PeciError as exc:
            logger.warning("skipping %s: %s", pid, exc)
            skipped.append(pid)
            continue
        m = len(pairs)
        k = min(args.k, m - 1) if args.k is not None else default_k_schedule(m)
        weights[pid] = weight

        t0 = time.perf_counter()
        try:
            base_dir = igci_score(pairs).decision
        except PeciError:
            base_dir = Direction.UNDECIDED
        base_time = time.perf_counter() - t0
        records.append(
            ResultRecord(pid, "igci", m, 1, "none", base_dir.label, float(base_dir.value),
                         base_dir is truth, base_time if args.timing else 0.0)
        )
        t0 = time.perf_counter()
        deltas = ensemble_deltas(pairs, k, args.T, args.seed, workers=workers)
        ens_time = time.perf_counter() - t0
        for name, scheme in BENCH_METHODS:
            res = decide(deltas, scheme)
            records.append(
                ResultRecord(pid, name, k, args.T, scheme.value, res.direction.label, res.vote_sum,
                             res.direction is truth, ens_time if args.timing else 0.0)
            )
    if not records:
        raise PeciError("no usable pairs matched the metadata")
    if args.out:
        write_results(args.out, records, args.format)

    lines = ["method,correct,total,accuracy,weighted_accuracy"]
    for name in ["igci"] + [n for n, _ in BENCH_METHODS]:
        rs = [r for r in records if r.method == name]
        correct = sum(r.correct for r in rs)
        wsum = sum(weights[r.id] for r in rs)
        wcorrect = sum(weights[r.id] for r in rs if r.correct)
        lines.append(f"{name},{correct},{len(rs)},{correct / len(rs)!r},{(wcorrect / wsum if wsum else math.nan)!r}")
    if skipped or meta.excluded:
        lines.append(f"# skipped: {' '.join(skipped) or '-'}; excluded by metadata: {' '.join(meta.excluded) or '-'}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------- sweeps


def cmd_sweep(args) -> int:
    kind = "k" if args.command == "sweep-k" else "T"
    if args.replicates < 1:
        raise UsageError("--replicates must be >= 1")

    def progress(done, total):
        if args.verbose:
            print(f"replicate {done}/{total}", file=sys.stderr)

    result = run_sweep(
        kind, args.grid, m=args.m, noise_var=args.noise_var, k=args.k, T=args.T,
        replicates=args.replicates, seed=args.seed, workers=_workers(args), progress=progress,
    )
    _emit(args, result.to_csv())
    c = result.c_hat
    if c > 0:
        print(f"# c_hat={c!r} argmax_k C(m,k) erf^2(c sqrt(k-1)) = {best_k(c, args.m)} (heuristic)", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------- stability


def cmd_stability(args) -> int:
    pairs = load_pair_file(args.file)
    m = len(pairs)
    start = args.start if args.start is not None else min(200, m)
    if not 3 <= start <= m:
        raise UsageError(f"--start must lie in [3, {m}]")
    k = args.k if args.k is not None else default_k_schedule(max(start, 4))
    columns = {}
    for T in args.T_list:
        config = None if T == 0 else EnsembleConfig(k=k, T=T, seed=args.seed)
        columns[T] = prefix_replay(pairs, start, config, workers=_workers(args))
    header = ["L"] + [f"T{T}" for T in args.T_list]
    lines = [",".join(header)]
    for i, L in enumerate(range(start, m + 1)):
        lines.append(",".join([str(L)] + [str(columns[T][i].value) for T in args.T_list]))
    _emit(args, "\n".join(lines) + "\n")
    for T in args.T_list:
        label = "base" if T == 0 else f"T={T}"
        print(f"# flips {label}: {flip_count(columns[T])}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------- gen


def cmd_gen(args) -> int:
    if args.kind == "exp":
        pairs, truth = gen_exp_pairs(ExpGenParams(m=args.m, noise_var=args.noise_var, seed=args.seed))
    else:
        preset = dict(GP_PRESETS[args.preset])
        if args.tau is not None:
            preset["tau"] = args.tau
        pairs, truth = gen_gp_pairs(GpGenParams(m=args.m, seed=args.seed, **preset))
    if args.out:
        write_pair_file(args.out, pairs)
    else:
        sys.stdout.writelines(f"{a!r} {b!r}\n" for a, b in zip(pairs.x.tolist(), pairs.y.tolist()))
    print(f"# truth: {truth.label}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------- theory


def cmd_theory(args) -> int:
    if args.file is not None:
        if args.truth is None:
            raise UsageError("--truth is required with a data file")
        pairs = load_pair_file(args.file).normalized()
        c = estimate_c(pairs, Direction.parse(args.truth)).c
        m = len(pairs)
    else:
        if args.c is None or args.m is None:
            raise UsageError("give either a data file with --truth, or both --c and --m")
        c, m = args.c, args.m
    k_grid = args.k_grid or sorted({max(2, m // 8), max(2, m // 4), max(2, m // 2), max(2, 3 * m // 4)})
    T_grid = args.T_grid or [10, 100, 1000]

    lines = [f"c: {c!r}", f"m: {m}", f"base_error_rate: {base_error_rate(c, m)!r}"]
    try:
        crit = critical_ensemble_size(c, m)
        lines.append(f"critical_ensemble_size: {crit!r}")
        saturated = False
    except Saturated:
        lines.append("critical_ensemble_size: bound saturated")
        saturated = True
    lines.append("k,T,bound,k_ok,T_ok")
    for k in k_grid:
        if not 2 <= k < m:
            raise UsageError(f"k={k} must satisfy 2 <= k < m={m}")
        for T in T_grid:
            bound = ensemble_error_bound(c, k, T)
            if saturated:
                k_ok = T_ok = "saturated"
            else:
                k_ok, T_ok = corollary_conditions(c, m, k, T)
                k_ok, T_ok = str(k_ok).lower(), str(T_ok).lower()
            lines.append(f"{k},{T},{bound!r},{k_ok},{T_ok}")
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="peci", description="Parallel-ensemble causal direction inference.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("infer", help="infer the direction of one pair file")
    p.add_argument("file")
    _ensemble_args(p)
    p.add_argument("--theory", action="store_true", help="also print estimated c and the ensemble bound")
    p.add_argument("--truth", choices=["xy", "yx"], default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("bench", help="score a directory of pair files against metadata")
    p.add_argument("directory")
    p.add_argument("--meta", default=None, help="metadata file (default DIR/pairmeta.txt)")
    _ensemble_args(p, T=1000)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    p.add_argument("--timing", action="store_true", help="record elapsed seconds (output no longer reproducible)")
    p.set_defaults(func=cmd_bench)

    for name, default_grid, help_text in (
        ("sweep-k", "200:1900:100", "accuracy against subsample size k"),
        ("sweep-T", "10:100:10", "accuracy against number of tasks T"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--grid", type=_int_list, default=_int_list(default_grid))
        p.add_argument("--k", type=int, default=None, help="fixed k for sweep-T (default m/2)")
        p.add_argument("--T", type=_positive, default=100, help="fixed T for sweep-k")
        p.add_argument("--m", type=_positive, default=2000)
        p.add_argument("--noise-var", type=float, default=40.0)
        p.add_argument("--replicates", type=_positive, default=100)
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--workers", type=_positive, default=None)
        p.add_argument("--out", default=None)
        p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("stability", help="decisions on growing prefixes of a pair file")
    p.add_argument("file")
    p.add_argument("--start", type=int, default=None, help="first prefix length (default 200)")
    p.add_argument("--T-list", dest="T_list", type=_int_list, default=[0, 100, 200, 500],
                   help="task counts; 0 is the base learner")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--workers", type=_positive, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("gen", help="write a synthetic pair file")
    p.add_argument("kind", choices=["exp", "gp"])
    p.add_argument("--m", type=_positive, default=2000)
    p.add_argument("--noise-var", type=float, default=40.0)
    p.add_argument("--preset", choices=sorted(GP_PRESETS), default="sim")
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("theory", help="evaluate error rates and ensemble bounds")
    p.add_argument("file", nargs="?", default=None)
    p.add_argument("--truth", choices=["xy", "yx"], default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k-grid", type=_int_list, default=None)
    p.add_argument("--T-grid", type=_int_list, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_theory)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"peci: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PeciError, ValueError, OSError) as exc:
        print(f"peci: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
