"""Command-line experiment runner.

Every subcommand needs an explicit ``--seed``. Data goes to ``--out`` (or to
stdout when no path is given); a short human-readable summary is printed to
stdout when the data goes to a file. Output never depends on ``--threads``.

Exit codes: 0 success, 2 usage error, 3 resource limit, 4 sampling failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .conjectures import test_fp_monotone, test_inequality_66, test_volume_monotone
from .errors import InvalidDimension, InvalidInput, ResourceLimit, SamplingFailure
from .groups import FiniteAbelianGroup, weyl_basis
from .moments import (MomentSeries, averaged_t_matrices, catalan, char_square_moments,
                      gram_model_moments, lis_moment, pauli_sampler, weyl_lambda_moments)
from .montecarlo import batch_rng
from .serialize import dumps
from .sinkhorn import flatten, random_tuple, universal_moments

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_SAMPLING = 0, 2, 3, 4
PIPELINES = ("transfer", "gram", "weyl", "char")
LIS_MAX_P = 10


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    """``"1,2"`` or ``"2-8"`` or ``"3"`` -> list of ints."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list {text!r}")
    return out


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _config(args: argparse.Namespace) -> dict:
    skip = {"threads", "out", "trace_dir", "func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _provenance(args) -> dict:
    return {"config": _config(args), "version": __version__}


def _combined_z(a: float, sa: float, b: float, sb: float) -> float | None:
    """``|a - b|`` in combined standard errors; ``None`` when undefined."""
    if abs(a - b) <= 1e-12 * max(1.0, abs(a)):
        return 0.0  # equal up to roundoff (e.g. exact p = 1 moments)
    se = float(np.hypot(sa, sb))
    if not np.isfinite(se) or se == 0:
        return None
    return float(abs(a - b) / se)


def cmd_weyl_moments(args) -> tuple[str, str]:
    try:
        h = FiniteAbelianGroup.parse(args.group)
    except (InvalidInput, InvalidDimension, ValueError) as exc:
        raise UsageError(f"bad group spec {args.group!r}: {exc}") from None
    n = h.size
    basis = weyl_basis(h)
    ps = list(range(1, args.pmax + 1))
    pipes = args.pipelines
    unknown = sorted(set(pipes) - set(PIPELINES))
    if unknown:
        raise UsageError(f"unknown pipelines {unknown}")
    common = {"batch_size": args.batch_size, "threads": args.threads}
    series: dict[int, dict[str, MomentSeries]] = {}
    if "transfer" in pipes:
        avg = averaged_t_matrices(pauli_sampler(basis), ps, args.samples, args.seed, **common)
        traces = {p: avg[p].moments(max(args.r)) for p in ps}
    for r in args.r:
        row: dict[str, MomentSeries] = {}
        if "transfer" in pipes:
            est = np.array([[traces[p][0][r - 1]] for p in ps])
            se = np.array([[traces[p][1][r - 1]] for p in ps])
            row["transfer"] = MomentSeries(f"transfer[{h}]", n * n, ps, [r], est, se,
                                           args.samples, args.seed)
        if "gram" in pipes:
            row["gram"] = gram_model_moments(basis, r, args.pmax, args.samples, args.seed + 1, **common)
        if "weyl" in pipes:
            row["weyl"] = weyl_lambda_moments(h, r, args.pmax, args.samples, args.seed + 2, **common)
        series[r] = row
    if "char" in pipes:
        char = char_square_moments(n, args.pmax, args.samples, args.seed + 3, **common)
    reference = {"catalan": [catalan(p) for p in ps]}
    if args.pmax <= LIS_MAX_P:
        reference["lis"] = [lis_moment(n, p) for p in ps]
    agreement = []
    for r in args.r:
        row = dict(series[r])
        if "char" in pipes:
            row["char"] = char
        names = sorted(row)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                for k, p in enumerate(ps):
                    va, sa = row[a].estimate[k, 0], row[a].stderr[k, 0]
                    vb, sb = row[b].estimate[k, 0], row[b].stderr[k, 0]
                    agreement.append({"r": r, "p": p, "pair": [a, b],
                                      "z": _combined_z(va, sa, vb, sb)})
    results = {str(r): {k: v.to_dict() for k, v in row.items()} for r, row in series.items()}
    data = {**_provenance(args), "group": str(h), "n": n, "N": n * n,
            "series": results, "reference": reference, "agreement": agreement}
    if "char" in pipes:
        data["char_square"] = char.to_dict()
    worst = max((a["z"] for a in agreement if a["z"] is not None), default=0.0)
    lines = [f"weyl-moments H={h} n={n} p<={args.pmax} r={args.r} samples={args.samples}"]
    for r in args.r:
        for name, s in sorted(results[str(r)].items()):
            lines.append(f"  r={r} {name:8s} " + " ".join(f"{v[0]:.4f}" for v in s["estimate"]))
    if "char" in pipes:
        lines.append("  char      " + " ".join(f"{v[0]:.4f}" for v in data["char_square"]["estimate"]))
    if "lis" in reference:
        lines.append("  lis       " + " ".join(str(v) for v in reference["lis"]))
    lines.append(f"  worst pairwise deviation: {worst:.2f} combined SE")
    return dumps(data), "\n".join(lines)


def _sinkhorn_trial(args, t: int) -> dict:
    x = random_tuple(args.N, batch_rng(args.seed, t))
    res = flatten(x, args.max_iters, args.tol, record_f3=args.f3)
    drops = res.trace.vol_drops(args.vol_slack)
    return {"trial": t, "converged": res.converged, "iterations": res.iterations,
            "residual": res.trace.residual[-1], "vol": res.trace.vol[-1],
            "vol_drops": len(drops), "worst_vol_step": min((d for _, d in drops), default=0.0),
            "degenerate_steps": len(res.trace.degenerate), "_trace": res.trace}


def cmd_sinkhorn(args) -> tuple[str, str]:
    if args.N < 2:
        raise UsageError("--N must be at least 2")
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            trials = list(pool.map(lambda t: _sinkhorn_trial(args, t), range(args.trials)))
    else:
        trials = [_sinkhorn_trial(args, t) for t in range(args.trials)]
    if args.trace_dir:
        os.makedirs(args.trace_dir, exist_ok=True)
        for rec in trials:
            path = os.path.join(args.trace_dir, f"trace_{rec['trial']:05d}.csv")
            with open(path, "w", newline="") as fh:
                fh.write(rec["_trace"].to_csv(args.vol_slack))
    for rec in trials:
        del rec["_trace"]
    iters = [r["iterations"] for r in trials if r["converged"]]
    summary = {"trials": args.trials, "converged": sum(r["converged"] for r in trials),
               "median_iterations": float(np.median(iters)) if iters else None,
               "max_iterations": max(iters) if iters else None,
               "runs_with_vol_drops": sum(r["vol_drops"] > 0 for r in trials)}
    data = {**_provenance(args), "summary": summary, "runs": trials}
    text = (f"sinkhorn N={args.N}: {summary['converged']}/{args.trials} converged "
            f"(tol {args.tol:g}, max {args.max_iters} steps), median steps {summary['median_iterations']}, "
            f"runs with vol drops {summary['runs_with_vol_drops']}")
    return dumps(data), text


def cmd_universal(args) -> tuple[str, str]:
    series = universal_moments(args.N, args.pmax, args.rmax, args.samples, args.seed,
                               batch_size=args.batch_size, threads=args.threads,
                               max_iters=args.max_iters, residual_tol=args.tol)
    if args.format == "csv":
        body = series.to_csv()
    else:
        body = dumps({**_provenance(args), **series.to_dict()})
    lines = [f"universal N={args.N} samples={args.samples} (resamples {series.extra['resamples']})"]
    for a, p in enumerate(series.p_values):
        vals = " ".join(f"{v:.5f}" for v in series.estimate[a])
        lines.append(f"  p={p} c^r: {vals}   catalan {series.reference['catalan'][a]}")
    return body, "\n".join(lines)


def cmd_conjectures(args) -> tuple[str, str]:
    reports = []
    if args.which == "trace-inequality":
        ranks = tuple(args.ranks) if args.ranks else None
        if ranks is not None and len(ranks) not in (2, 3):
            raise UsageError("--ranks takes 2 or 3 integers")
        reports.append(test_inequality_66(args.trials, args.K, ranks, args.seed, mode=args.mode,
                                          slack=args.slack if args.slack is not None else 1e-10))
    elif args.which == "volume":
        for n in args.N:
            reports.append(test_volume_monotone(n, args.trials, args.seed,
                                                slack=args.slack if args.slack is not None else 1e-12))
    else:
        for n in args.N:
            for p in args.p:
                reports.append(test_fp_monotone(n, p, args.trials, args.seed,
                                                slack=args.slack if args.slack is not None else 1e-12))
    data = {**_provenance(args), "reports": [r.to_dict() for r in reports]}
    lines = [f"{r.conjecture} {r.params}: {r.violations} violations in {r.trials} trials, "
             f"worst margin {r.worst_margin:.3e}" for r in reports]
    return dumps(data), "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flatmagic", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, batch=True):
        p.add_argument("--seed", type=int, required=True, help="master seed (mandatory)")
        p.add_argument("--threads", type=_positive, default=1, help="worker threads (output does not depend on it)")
        p.add_argument("--out", help="output file (default: stdout)")
        if batch:
            p.add_argument("--batch-size", type=_positive, default=1024, help="samples per RNG batch")

    p = sub.add_parser("weyl-moments", help="character moments of a fully split Weyl model",
                       description="Moment pipelines for the fully split model over H x H^. "
                                   "Group syntax: Zn factors joined by 'x', e.g. Z2, Z3, Z2xZ2.")
    p.add_argument("--group", required=True, help="finite abelian group, e.g. Z2 or Z2xZ2")
    p.add_argument("--pmax", type=_positive, default=3)
    p.add_argument("--r", type=_int_list, default=[1], help="truncation orders, e.g. 1,2")
    p.add_argument("--samples", type=_positive, default=100_000)
    p.add_argument("--pipelines", type=lambda s: s.split(","), default=list(PIPELINES),
                   help=f"comma list from {','.join(PIPELINES)}")
    common(p)
    p.set_defaults(func=cmd_weyl_moments)

    p = sub.add_parser("sinkhorn", help="flatten Haar starts onto magic bases")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--trials", type=_positive, default=100)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=_positive, default=10_000)
    p.add_argument("--vol-slack", type=float, default=1e-12)
    p.add_argument("--f3", action="store_true", help="also record F_3 in traces")
    p.add_argument("--trace-dir", help="directory for per-run trace CSV files")
    common(p, batch=False)
    p.set_defaults(func=cmd_sinkhorn)

    p = sub.add_parser("universal", help="truncated moments of the universal flat model")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--pmax", type=_positive, default=3)
    p.add_argument("--rmax", type=_positive, default=6)
    p.add_argument("--samples", type=_positive, default=10_000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=_positive, default=10_000)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    common(p)
    p.set_defaults(func=cmd_universal)

    p = sub.add_parser("conjectures", help="randomized evidence reports")
    p.add_argument("--which", choices=("volume", "fp", "trace-inequality"), required=True)
    p.add_argument("--trials", type=_positive, default=1000)
    p.add_argument("--N", type=_int_list, default=[2], help="grid sizes (volume, fp)")
    p.add_argument("--p", type=_int_list, default=[2], help="word lengths (fp)")
    p.add_argument("--K", type=_int_list, default=[4], help="dimensions, e.g. 2-8 (trace-inequality)")
    p.add_argument("--ranks", type=_int_list, help="rank_p,rank_q[,rank_r]; random when omitted")
    p.add_argument("--mode", choices=("literal", "s-zero-relaxed"), default="literal")
    p.add_argument("--slack", type=float)
    common(p, batch=False)
    p.set_defaults(func=cmd_conjectures)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        body, summary = args.func(args)
    except (UsageError, InvalidInput, InvalidDimension) as exc:
        print(f"flatmagic: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimit as exc:
        print(f"flatmagic: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except SamplingFailure as exc:
        print(f"flatmagic: sampling failure: {exc}", file=sys.stderr)
        return EXIT_SAMPLING
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(body)
        print(summary)
    else:
        sys.stdout.write(body)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
