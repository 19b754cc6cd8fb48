"""Command line interface: ``clrlr estimate|simulate|bench|spectrum``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .autotune import TuneConfig, auto_tune
from .baselines import zr_estimate
from .bench import ESTIMATORS, run_bench, run_replicate
from .compositional import softmax_inv
from .errors import ClrlrError, NumericError
from .io import CountTable, read_counts, write_counts, write_json, write_matrix, write_rows
from .simulation import format_scenario, load_scenario, simulate
from .solver import SolverConfig, solve

log = logging.getLogger("clrlr")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class OutputExists(ClrlrError):
    pass


def _prepare_out_dir(out_dir, names, force):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    clash = [n for n in names if (out_dir / n).exists()]
    if clash and not force:
        raise OutputExists(f"{out_dir}: {', '.join(clash)} already exist (use --force to overwrite)")
    return out_dir


def _solver_config(args, lam=0.0) -> SolverConfig:
    return SolverConfig(lam=lam, gamma_L=args.gamma_L, L0=args.L0, rho=args.rho, eps_gap=args.eps_gap,
                        max_iters=args.max_iters, perturb_sigma=args.perturb_sigma,
                        n_starts=args.n_starts, seed=args.seed)


def _tune_config(args) -> TuneConfig:
    return TuneConfig(max_rounds=args.max_rounds, eps_rel=args.eps_rel,
                      gamma_lambda=args.gamma_lambda, solver=_solver_config(args))


def _write_trace(path, trace):
    rows = [(r.iteration, r.objective, r.loss, r.nuclear_norm, r.L, r.gap, r.rank)
            for r in (trace.records if trace else [])]
    write_rows(path, ("iteration", "objective", "loss", "nuclear_norm", "L", "gap", "rank"), rows)


def _write_singular_values(path, s):
    write_rows(path, ("index", "value"), [(i, float(v)) for i, v in enumerate(s, start=1)])


def _omega_rows(z_hat, counts):
    member = np.where(counts.values > 0, "Omega", "OmegaC")
    return [(float(v), m) for v, m in zip(z_hat.ravel(), member.ravel())]


def cmd_estimate(args) -> int:
    table = read_counts(args.counts, args.format)
    names = ["z_hat.csv", "composition.csv", "singular_values.csv", "trace.csv",
             "summary.json", "omega_boxplot.csv"] + (["tune_trace.csv"] if args.auto else [])
    out = _prepare_out_dir(args.out_dir, names, args.force)
    w = table.counts

    tune_trace = None
    if args.auto:
        est, tune_trace = auto_tune(w, _tune_config(args))
    else:
        est = solve(w, _solver_config(args, args.lam))

    write_matrix(out / "z_hat.csv", est.z_hat, table.sample_ids, table.taxa_ids)
    write_matrix(out / "composition.csv", softmax_inv(est.z_hat), table.sample_ids, table.taxa_ids)
    _write_singular_values(out / "singular_values.csv", est.singular_values)
    _write_trace(out / "trace.csv", est.trace)
    write_rows(out / "omega_boxplot.csv", ("value", "membership"), _omega_rows(est.z_hat, w))
    summary = {
        "lambda": est.lam,
        "auto": bool(args.auto),
        "objective": est.objective.total,
        "loss": est.objective.loss,
        "penalty": est.objective.penalty,
        "nuclear_norm": est.nuclear_norm,
        "rank": est.rank,
        "iterations": est.trace.iterations,
        "termination": est.trace.reason,
        "start_index": est.trace.start_index,
        "n": w.n,
        "p": w.p,
        "seed": args.seed,
    }
    if tune_trace is not None:
        summary["lambda_auto"] = tune_trace.lambda_auto
        summary["tune_rounds"] = len(tune_trace)
        summary["tune_termination"] = tune_trace.reason
        write_rows(out / "tune_trace.csv",
                   ("round", "lambda", "R", "objective", "nuclear_norm", "loss", "accepted"),
                   [(r.round, r.lam, r.R_value, r.objective, r.nuclear_norm, r.loss, int(r.accepted))
                    for r in tune_trace.records])
    write_json(out / "summary.json", summary)
    log.info("lambda=%g objective=%.6g rank=%d (%s)", est.lam, est.objective.total, est.rank,
             est.trace.reason)
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.gamma is not None:
        scenario = scenario.with_(gamma=args.gamma)
    names = ["counts.tsv", "z_star.csv", "x_star.csv", "read_props.csv", "scenario.txt"]
    out = _prepare_out_dir(args.out_dir, names, args.force)
    inst = simulate(scenario, args.replicate)
    samples = [f"s{i + 1}" for i in range(scenario.n)]
    taxa = [f"t{j + 1}" for j in range(scenario.p)]
    write_counts(out / "counts.tsv", CountTable(samples, taxa, inst.counts))
    write_matrix(out / "z_star.csv", inst.z_star, samples, taxa)
    write_matrix(out / "x_star.csv", inst.x_star, samples, taxa)
    write_rows(out / "read_props.csv", ("sample", "read_prop", "depth"),
               [(s, float(r), int(d)) for s, r, d in zip(samples, inst.read_props, inst.counts.row_totals)])
    (out / "scenario.txt").write_text(format_scenario(scenario))
    return EXIT_OK


def cmd_bench(args) -> int:
    scenario = load_scenario(args.scenario)
    estimators = [e.strip() for e in args.estimators.split(",") if e.strip()]
    gammas = [int(g) for g in args.gammas.split(",")] if args.gammas else None
    names = ["records.csv", "report.csv", "timing.csv"] + (["scatter.csv"] if args.scatter else [])
    out = _prepare_out_dir(args.out_dir, names, args.force)
    tune = _tune_config(args)
    report = run_bench(scenario, args.replicates, estimators, gammas, tune,
                       lam=args.lam, svt_rank=args.svt_rank)
    report.write(out)
    if args.scatter:
        _, inst, ests = run_replicate(scenario.with_(gamma=gammas[0]) if gammas else scenario, 0,
                                      estimators, tune, args.lam, args.svt_rank, keep_estimates=True)
        cols = ["z_star"] + list(ests)
        rows = zip(inst.z_star.ravel(), *(ests[e].z_hat.ravel() for e in ests))
        write_rows(out / "scatter.csv", cols, [tuple(float(x) for x in r) for r in rows])
    header, rows = report.table()
    for row in rows:
        log.info(" ".join(f"{h}={v:.4g}" if isinstance(v, float) else f"{h}={v}" for h, v in zip(header, row)))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    table = read_counts(args.counts, args.format)
    out = _prepare_out_dir(args.out_dir, ["singular_values.csv"], args.force)
    _write_singular_values(out / "singular_values.csv", zr_estimate(table.counts).singular_values)
    return EXIT_OK


def _add_solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n-starts", type=int, default=4)
    g.add_argument("--max-iters", type=int, default=10_000)
    g.add_argument("--eps-gap", type=float, default=1e-7)
    g.add_argument("--gamma-L", dest="gamma_L", type=float, default=1.5)
    g.add_argument("--L0", dest="L0", type=float, default=1.0)
    g.add_argument("--rho", type=float, default=5.0)
    g.add_argument("--perturb-sigma", type=float, default=1e-3)
    t = p.add_argument_group("auto-tuning")
    t.add_argument("--max-rounds", type=int, default=100)
    t.add_argument("--eps-rel", type=float, default=1e-3)
    t.add_argument("--gamma-lambda", type=float, default=1.5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clrlr", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="fit the low-rank CLR matrix to a count table")
    p.add_argument("counts", help="count table (header of taxa ids, first column sample ids)")
    p.add_argument("--format", choices=("tsv", "csv"), default=None)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--lambda", dest="lam", type=float, help="fixed nuclear-norm weight")
    mode.add_argument("--auto", action="store_true", help="select the weight automatically")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--force", action="store_true", help="overwrite existing outputs")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="draw one simulated data set")
    p.add_argument("scenario", help="key = value scenario file")
    p.add_argument("--replicate", type=int, default=0)
    p.add_argument("--gamma", type=int, default=None, help="override the scenario depth multiplier")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="compare estimators over simulated replicates")
    p.add_argument("scenario")
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--estimators", default=",".join(ESTIMATORS))
    p.add_argument("--gammas", default=None, help="comma-separated depth multipliers, e.g. 1,2,3,4,5")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="fixed weight for nuc instead of auto-tuning")
    p.add_argument("--svt-rank", type=int, default=None, help="rank of the svt baseline (default: scenario r)")
    p.add_argument("--scatter", action="store_true", help="also write entrywise estimates of replicate 0")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--force", action="store_true")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("spectrum", help="singular values of the zero-replacement CLR matrix")
    p.add_argument("counts")
    p.add_argument("--format", choices=("tsv", "csv"), default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"clrlr: numeric error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (ClrlrError, OSError) as exc:
        print(f"clrlr: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
