"""Command-line front end: ``lrdmd {fit,factorize,simulate,compare,bench}``.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure,
4 iterative solver did not converge.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import dumps, load_model, load_spectral, provenance, save_model, save_spectral
from .bench import TimingSpec, appendix_case, compare_estimators, timing_bench, timing_csv
from .errors import (
    AlphaBracketFailure,
    CapExceeded,
    GammaGridExhausted,
    InvalidInput,
    LrdmdError,
    NotConverged,
    NumericalFailure,
)
from .estimators import METHODS, AdmmConfig, fit
from .rom import simulate, simulate_spectral, trajectories_to_set
from .snapshots import assemble_pair, load_snapshots, save_snapshots
from .spectral import evd_lowrank, reconstruction_check, rom_params_from_factors, rom_params_from_spectral

log = logging.getLogger("lrdmd")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_NOT_CONVERGED = 0, 2, 3, 4


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(float(v)) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_data_args(p):
    src = p.add_argument_group("data source")
    src.add_argument("--input", help="snapshot file (CSV or binary)")
    src.add_argument("--format", choices=("csv", "bin"), help="snapshot format (default: detect)")
    src.add_argument("--appendix", choices=("X1", "X2"), help="use the built-in 3x2 analytic example")
    src.add_argument("--eps", type=float, default=0.0, help="perturbation entry of the analytic example")


def _add_solver_args(p):
    g = p.add_argument_group("estimator options")
    g.add_argument("--gamma-grid", type=_float_list, help="sparse DMD penalty weights, comma separated")
    g.add_argument("--alpha", type=float, help="nuclear-norm weight (default: tuned to reach rank k)")
    g.add_argument("--rho", type=float, default=1.0, help="ADMM penalty parameter")
    g.add_argument("--tol", type=float, default=1e-8, help="ADMM absolute tolerance")
    g.add_argument("--tol-rel", type=float, default=1e-6, help="ADMM relative tolerance")
    g.add_argument("--max-iters", type=int, default=5000, help="ADMM iteration cap")


def build_parser():
    parser = argparse.ArgumentParser(prog="lrdmd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lrdmd {__version__}")
    parser.add_argument("--config", help="JSON file whose keys set option defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.commands = sub.choices

    p = sub.add_parser("fit", help="fit a low-rank operator and write a model artifact")
    _add_data_args(p)
    p.add_argument("--method", choices=METHODS, default="optimal")
    p.add_argument("--k", type=int, help="target rank")
    _add_solver_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model artifact path (.json)")

    p = sub.add_parser("factorize", help="spectral factorization of a model artifact")
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, default=0, help="seed of the reconstruction probe vectors")
    p.add_argument("--out", required=True, help="spectral artifact path (.json)")

    p = sub.add_parser("simulate", help="run the reduced model from initial conditions")
    p.add_argument("--model", help="model artifact (.json)")
    p.add_argument("--spectral", help="spectral artifact (.json)")
    p.add_argument("--form", choices=("pq", "spectral"), default="pq",
                   help="reduced-model form when starting from --model")
    p.add_argument("--theta", required=True, help="CSV file, one initial condition per line")
    p.add_argument("--T", type=int, required=True, help="trajectory length (>= 2)")
    p.add_argument("--format", choices=("csv", "bin"), default="csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("compare", help="run all estimators and write a comparison report")
    _add_data_args(p)
    p.add_argument("--k", type=_int_list, required=False, help="comma-separated ranks")
    p.add_argument("--method", type=lambda s: s.split(","), default=list(METHODS),
                   help="comma-separated subset of estimators")
    _add_solver_args(p)
    p.add_argument("--with-timing", action="store_true", help="add wall times (makes output nondeterministic)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix; writes <out>.json and <out>.csv")

    p = sub.add_parser("bench", help="timing of the off-line fit and on-line simulation")
    p.add_argument("--n", type=_int_list, required=True, help="comma-separated state dimensions")
    p.add_argument("--m", type=int, default=20)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--T", type=int, default=50)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV output path")
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            overrides = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        # config supplies defaults; explicit flags still win
        sub = parser.commands[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(overrides) - known
        if unknown:
            parser.error(f"unknown config keys for {args.command}: {sorted(unknown)}")
        sub.set_defaults(**overrides)
        args = parser.parse_args(argv)
    _validate(parser, args)
    return args


def _validate(parser, args):
    if args.command in ("fit", "compare"):
        if bool(args.input) == bool(args.appendix):
            parser.error("give exactly one of --input or --appendix")
    if args.command == "fit":
        if args.k is None and not (args.method == "nuclear" and args.alpha is not None):
            parser.error("--k is required")
        if args.k is not None and args.k < 1:
            parser.error(f"--k must be >= 1, got {args.k}")
    if args.command == "compare":
        if not args.k or min(args.k) < 1:
            parser.error("--k must list ranks >= 1")
        bad = set(args.method) - set(METHODS)
        if bad:
            parser.error(f"unknown methods {sorted(bad)}")
    if args.command == "simulate":
        if bool(args.model) == bool(args.spectral):
            parser.error("give exactly one of --model or --spectral")
        if args.T < 2:
            parser.error("--T must be >= 2")
    if args.command == "bench" and (args.m < 1 or args.k < 1 or args.k > args.m or args.T < 2 or args.repeats < 1):
        parser.error("bench needs 1 <= k <= m, T >= 2, repeats >= 1")


def resolved_config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("verbose",)}


def _load_pair(args):
    if args.appendix:
        return appendix_case(args.appendix, args.eps)
    return assemble_pair(load_snapshots(args.input, args.format))


def _admm_cfg(args):
    return AdmmConfig(rho=args.rho, max_iters=args.max_iters, tol_abs=args.tol, tol_rel=args.tol_rel)


def cmd_fit(args):
    pair = _load_pair(args)
    factors, report = fit(
        pair, args.method, args.k, gamma_grid=args.gamma_grid, alpha=args.alpha, admm_cfg=_admm_cfg(args)
    )
    meta = provenance("fit", resolved_config(args), args.seed)
    meta["data"] = {"n": pair.n, "m": pair.m}
    save_model(args.out, factors, report, meta)
    log.info("%s rank %d residual %.6g", args.method, factors.r, report.residual_frobenius)
    return EXIT_OK


def cmd_factorize(args):
    factors, _ = load_model(args.model)
    model = evd_lowrank(factors)
    meta = provenance("factorize", resolved_config(args), args.seed)
    if model.diagonalizable:
        passed, err = reconstruction_check(factors, model, seed=args.seed)
        meta["reconstruction_check"] = {"status": "passed" if passed else "failed", "max_error": err}
    else:
        meta["reconstruction_check"] = {"status": "skipped", "max_error": None}
        print(
            f"lrdmd: operator is not diagonalizable (cond {model.cond_estimate:.3g}); "
            "spectral reduced model refused, use --form pq",
            file=sys.stderr,
        )
    save_spectral(args.out, model, meta)
    return EXIT_OK


def _read_thetas(path, n):
    path = Path(path)
    if not path.exists():
        raise InvalidInput(f"initial-condition file not found: {path}")
    try:
        thetas = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
    except ValueError as exc:
        raise InvalidInput(f"cannot parse initial conditions in {path}: {exc}") from None
    if thetas.shape[1] != n:
        raise InvalidInput(f"initial conditions have dimension {thetas.shape[1]}, model has n={n}")
    if not np.all(np.isfinite(thetas)):
        raise InvalidInput("initial conditions contain non-finite values")
    return thetas


def cmd_simulate(args):
    if args.model:
        factors, _ = load_model(args.model)
        if args.form == "pq":
            rom = rom_params_from_factors(factors)
        else:
            rom = rom_params_from_spectral(evd_lowrank(factors))
        n = factors.n

        def run(theta):
            return simulate(rom, theta, args.T)
    else:
        model, _ = load_spectral(args.spectral)
        n = model.n

        def run(theta):
            return simulate_spectral(model, theta, args.T)

    thetas = _read_thetas(args.theta, n)
    trajs = [run(theta) for theta in thetas]
    diverged = [i + 1 for i, tr in enumerate(trajs) if tr.diverged]
    if diverged:
        raise NumericalFailure(f"trajectories {diverged} diverged (|x| > 1e150)")
    ts = trajectories_to_set(trajs)
    meta = provenance("simulate", resolved_config(args), args.seed)
    if args.format == "csv":
        save_snapshots(ts, args.out, "csv", comments=[json.dumps(meta, sort_keys=True)])
    else:
        save_snapshots(ts, args.out, "bin")
        Path(str(args.out) + ".meta.json").write_text(dumps(meta))
    return EXIT_OK


def cmd_compare(args):
    pair = _load_pair(args)
    report = compare_estimators(
        pair, args.k, methods=args.method, gamma_grid=args.gamma_grid, admm_cfg=_admm_cfg(args), alpha=args.alpha
    )
    meta = provenance("compare", resolved_config(args), args.seed)
    doc = dict(meta, rows=report.to_json_obj(args.with_timing))
    Path(f"{args.out}.json").write_text(dumps(doc))
    header = f"# {json.dumps(meta, sort_keys=True)}\n"
    Path(f"{args.out}.csv").write_text(header + report.to_csv(args.with_timing))
    for row in report.rows:
        if row.error:
            log.warning("%s k=%d failed: %s", row.estimator, row.k, row.error)
    if all(row.error for row in report.rows):
        print("lrdmd: every estimator failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_bench(args):
    spec = TimingSpec(n_list=tuple(args.n), m=args.m, k=args.k, T=args.T, repeats=args.repeats, seed=args.seed)
    rows = timing_bench(spec)
    meta = provenance("bench", resolved_config(args), args.seed)
    Path(args.out).write_text(f"# {json.dumps(meta, sort_keys=True)}\n" + timing_csv(rows))
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "factorize": cmd_factorize,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "bench": cmd_bench,
}


def main(argv=None):
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="lrdmd: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except NotConverged as exc:
        print(f"lrdmd: not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (InvalidInput, CapExceeded) as exc:
        print(f"lrdmd: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, GammaGridExhausted, AlphaBracketFailure, LrdmdError) as exc:
        print(f"lrdmd: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
