"""Command-line interface.

Subcommands:

- ``synth``      generate a synthetic planted-low-rank matrix file
- ``factorize``  lp low-rank factorization (deterministic or randomized)
- ``baseline``   the SVD rank-k baseline
- ``sweep``      evaluate a (k, p, method) grid in parallel, one merged report
- ``check``      run the internal verifications on a factorization

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict

import numpy as np

from .errors import LplrError
from .factor import Method, low_rank
from .lowner import LevelSet, LownerConfig, contracted_vertices, lowner
from .matio import load_matrix, store_matrix
from .report import evaluate, report_to_json
from .rng import philox
from .synth import SyntheticSpec, generate_synthetic


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the CLI contract wants 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="lplr", description="lp-norm low-rank matrix approximation")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic matrix file")
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--d", type=int, required=True)
    synth.add_argument("--k-true", type=int, required=True)
    synth.add_argument("--outliers", type=float, default=0.0, help="outlier row fraction in [0,1)")
    synth.add_argument("--outlier-scale", type=float, default=20.0)
    synth.add_argument(
        "--noise",
        type=float,
        default=0.01,
        help="noise sigma; the default keeps the matrix full rank (pass 0 for an exactly rank-k-true matrix)",
    )
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)

    def add_common(p):
        p.add_argument("--input", required=True)
        p.add_argument("--rank", type=int, required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--report", default=None)
        p.add_argument("--out-left", default=None)
        p.add_argument("--out-right", default=None)

    fact = sub.add_parser("factorize", help="lp low-rank factorization")
    add_common(fact)
    fact.add_argument("--p", type=float, required=True)
    fact.add_argument("--method", choices=[m.value for m in Method], default="lowner")
    fact.add_argument("--contraction", choices=["inv-d", "inv-sqrt-d"], default="inv-d")

    base = sub.add_parser("baseline", help="SVD rank-k baseline")
    add_common(base)
    base.add_argument("--p", type=float, default=2.0, help="norm used for the reported error")

    sweep = sub.add_parser("sweep", help="evaluate a (k, p, method) grid")
    sweep.add_argument("--input", required=True)
    sweep.add_argument("--ks", required=True, help="comma-separated ranks")
    sweep.add_argument("--ps", required=True, help="comma-separated norm exponents")
    sweep.add_argument("--methods", default="lowner,svd", help="comma-separated methods")
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--report", required=True)
    sweep.add_argument("--csv", default=None, help="also write rate/error rows as CSV")

    check = sub.add_parser("check", help="verify a factorization's invariants")
    check.add_argument("--input", required=True)
    check.add_argument("--p", type=float, required=True)
    check.add_argument("--contraction", choices=["inv-d", "inv-sqrt-d"], default="inv-d")
    check.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n=args.n,
        d=args.d,
        k_true=args.k_true,
        outlier_fraction=args.outliers,
        noise_sigma=args.noise,
        outlier_scale=args.outlier_scale,
        seed=args.seed,
    )
    store_matrix(args.out, generate_synthetic(spec))
    print(f"wrote {args.n}x{args.d} matrix to {args.out}")
    return 0


def _run_one(a, k, p, method, seed, contraction="inv-d"):
    cfg = LownerConfig(contraction=contraction)
    start = time.perf_counter()
    approx = low_rank(a, k, p, method=method, seed=seed, cfg=cfg)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    report = evaluate(a, approx, p, wall_time_ms=elapsed_ms, seed=seed)
    return approx, report


def _write_outputs(args, approx, report) -> None:
    if args.out_left:
        store_matrix(args.out_left, approx.left)
    if args.out_right:
        store_matrix(args.out_right, approx.right)
    text = report_to_json(report)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _cmd_factorize(args) -> int:
    a = load_matrix(args.input)
    if not 1 <= args.rank <= min(a.shape) - 1:
        raise _UsageError(f"--rank must be in [1, {min(a.shape) - 1}] for a {a.shape[0]}x{a.shape[1]} input")
    if args.p < 1:
        raise _UsageError("--p must be >= 1")
    approx, report = _run_one(a, args.rank, args.p, args.method, args.seed, args.contraction)
    _write_outputs(args, approx, report)
    return 0


def _cmd_baseline(args) -> int:
    a = load_matrix(args.input)
    if not 1 <= args.rank <= min(a.shape) - 1:
        raise _UsageError(f"--rank must be in [1, {min(a.shape) - 1}] for a {a.shape[0]}x{a.shape[1]} input")
    approx, report = _run_one(a, args.rank, args.p, Method.SVD, args.seed)
    _write_outputs(args, approx, report)
    return 0


def _sweep_job(payload):
    """One (p, method) factorization, truncated at every requested k."""
    a, ks, p, method, seed = payload
    from .factor import l2_low_rank, lp_svd, lp_svd_randomized, truncate_factorization
    from .factor import orient as orient_input

    oriented, transposed = orient_input(a)
    start = time.perf_counter()
    if method is Method.SVD:
        fac = None
    elif method is Method.RANDOMIZED:
        fac = lp_svd_randomized(oriented, p, seed=seed)
    else:
        fac = lp_svd(oriented, p, cfg=LownerConfig())
    base_ms = (time.perf_counter() - start) * 1e3
    out = []
    for k in ks:
        t0 = time.perf_counter()
        approx = l2_low_rank(a, k) if fac is None else truncate_factorization(fac, k, transposed)
        report = evaluate(a, approx, p, wall_time_ms=base_ms + (time.perf_counter() - t0) * 1e3, seed=seed)
        out.append(asdict(report))
    return out


def _cmd_sweep(args) -> int:
    a = load_matrix(args.input)
    try:
        ks = sorted(int(s) for s in args.ks.split(",") if s)
        ps = [float(s) for s in args.ps.split(",") if s]
        methods = [Method(s.strip()) for s in args.methods.split(",") if s]
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    for k in ks:
        if not 1 <= k <= min(a.shape) - 1:
            raise _UsageError(f"rank {k} out of range for a {a.shape[0]}x{a.shape[1]} input")
    jobs = sorted((p, m) for p in ps for m in methods)
    payloads = [(a, ks, p, m, args.seed) for (p, m) in jobs]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            grouped = list(pool.map(_sweep_job, payloads))
    else:
        grouped = [_sweep_job(pl) for pl in payloads]
    results = sorted(
        (rep for group in grouped for rep in group),
        key=lambda r: (r["k"], r["p"], r["method"]),
    )
    with open(args.report, "w") as fh:
        json.dump(results, fh, indent=2)
        fh.write("\n")
    if args.csv:
        lines = ["k,p,method,compression_rate,error_pp,error_l2_baseline"]
        for rep in results:
            lines.append(
                f"{rep['k']},{rep['p']},{rep['method']},{rep['compression_rate']:.17g},"
                f"{rep['error_pp']:.17g},{rep['error_l2_baseline']:.17g}"
            )
        with open(args.csv, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    print(f"wrote {len(results)} reports to {args.report}")
    return 0


def _cmd_check(args) -> int:
    a = load_matrix(args.input)
    if a.shape[0] < a.shape[1]:
        a = a.T
    cfg = LownerConfig(contraction=args.contraction)
    level = LevelSet(a, args.p)
    res = lowner(a, args.p, cfg)
    checks = []

    verts = contracted_vertices(res.ellipsoid, cfg.contraction_factor(level.dim))
    checks.append(("contracted vertices inside level set", float(np.max(level.norms(verts))) <= 1.0 + 1e-6))

    dirs = philox(args.seed, stream=3).standard_normal((1000, level.dim))
    boundary = level.boundary(dirs)
    checks.append(("sampled boundary inside ellipsoid", float(np.max(res.ellipsoid.quadratic_form(boundary))) <= 1.0 + 1e-6))

    dets = res.logdet_trace
    checks.append(("det(F) strictly decreasing across cuts", bool(np.all(np.diff(dets) < 0))))

    ok = True
    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        ok = ok and passed
    return 0 if ok else 2


_COMMANDS = {
    "synth": _cmd_synth,
    "factorize": _cmd_factorize,
    "baseline": _cmd_baseline,
    "sweep": _cmd_sweep,
    "check": _cmd_check,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (LplrError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
