"""Command line interface: ``fpihf {solve,bench,norms}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from fractions import Fraction

from . import bench
from .exceptions import ConfigurationError, DivergenceError
from .problems import generate_instance, read_instance, write_instance

EXIT_CONFIG = 2
EXIT_IO = 3


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or fraction: {text!r}") from None


def _add_common(p):
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--cap", type=int, default=50000, help="iteration cap")
    p.add_argument("--gamma", type=float, help="step size for fpihf/fpif")
    p.add_argument("--override-stepsize", action="store_true",
                   help="run even if the step size violates its convergence bound")
    p.add_argument("--out", help="output file (default: stdout)")


def _add_grid(p, default_reps):
    p.add_argument("--kappa", type=_fraction, action="append",
                   help="repeatable; default 1/5 1/10 1/20 1/30")
    p.add_argument("--n", type=int, action="append",
                   help="full-scale N, repeatable; default 600 1200 2400")
    p.add_argument("--k-rule", action="append", choices=list(bench.K_RULES))
    p.add_argument("--scale", type=_fraction, default=None,
                   help="shrink factor applied to N (default 1/10)")
    p.add_argument("--replications", type=int,
                   help=f"seeds per cell (default {default_reps}, 20 with --full)")
    p.set_defaults(default_reps=default_reps)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--full", action="store_true",
                   help="full-scale grid: scale 1 and 20 replications")


def build_parser():
    parser = argparse.ArgumentParser(prog="fpihf", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one TV least-squares instance")
    p.add_argument("--instance", help="instance file; otherwise one is generated")
    p.add_argument("--n", type=int, default=60)
    p.add_argument("--k-rule", choices=list(bench.K_RULES), default="N/2")
    p.add_argument("--kappa", type=_fraction, default=Fraction(1, 5))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algo", choices=list(bench.ALGORITHMS), default="fpihf")
    p.add_argument("--save-instance", help="write the instance used to this file")
    p.add_argument("--solution", help="write the solution vector to this file")
    _add_common(p)

    p = sub.add_parser("bench", help="run the benchmark grid")
    _add_grid(p, default_reps=5)
    p.add_argument("--algo", action="append", choices=list(bench.ALGORITHMS))
    p.add_argument("--format", choices=["csv", "text", "aligned-text"], default="csv")
    p.add_argument("--runs", help="also write per-instance records to this CSV")
    p.add_argument("--jobs", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("norms", help="write ||A|| of every grid instance")
    _add_grid(p, default_reps=20)
    p.add_argument("--out", help="output file (default: stdout)")
    return parser


def _grid(args):
    kw = {"base_seed": args.seed}
    if args.kappa:
        kw["kappas"] = tuple(float(k) for k in args.kappa)
    if args.n:
        kw["Ns"] = tuple(args.n)
    if args.k_rule:
        kw["k_rules"] = tuple(args.k_rule)
    if args.replications is not None:
        kw["replications"] = args.replications
    elif not args.full:
        kw["replications"] = args.default_reps
    if args.scale is not None:
        kw["scale"] = args.scale
    grid = bench.ExperimentGrid.full_scale(**kw) if args.full else bench.ExperimentGrid(**kw)
    bench.warn_full_scale(grid)
    return grid


def _cmd_solve(args):
    if args.instance:
        inst = read_instance(args.instance)
    else:
        K = max(1, round(args.n * bench.K_RULES[args.k_rule]))
        inst = generate_instance(args.n, K, float(args.kappa), seed=args.seed)
    if args.save_instance:
        write_instance(inst, args.save_instance)
    kwargs = {"tol": args.tol, "max_iter": args.cap, "override_stepsize": args.override_stepsize}
    if args.gamma is not None and args.algo != "condat-vu":
        kwargs["gamma"] = args.gamma
    rep = bench.ALGORITHMS[args.algo](inst, **kwargs)
    row = {"algorithm": args.algo, "N": inst.N, "K": inst.K, "kappa": inst.kappa,
           "seed": inst.seed, "iterations": rep.iterations, "time_s": rep.wall_time_s,
           "final_residual": rep.final_residual, "objective": rep.objective,
           "termination": rep.termination.value}
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=list(row), lineterminator="\n")
        writer.writeheader()
        writer.writerow(row)
    finally:
        if args.out:
            out.close()
    if args.solution:
        with open(args.solution, "w") as fh:
            fh.write("\n".join(repr(float(v)) for v in inst.project(rep.x)) + "\n")


def _cmd_bench(args):
    grid = _grid(args)
    algos = args.algo or list(bench.ALGORITHMS)
    rows = bench.run_experiment(grid, algos, tol=args.tol, cap=args.cap, gamma=args.gamma,
                                override_stepsize=args.override_stepsize, n_jobs=args.jobs,
                                runs_path=args.runs)
    bench.emit_table(rows, args.out or sys.stdout, args.format)


def _cmd_norms(args):
    grid = _grid(args)
    bench.emit_norm_data(grid, args.out or sys.stdout)


def _fail(code, kind, exc):
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc)}) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    warnings.simplefilter("default")
    commands = {"solve": _cmd_solve, "bench": _cmd_bench, "norms": _cmd_norms}
    try:
        commands[args.command](args)
    except ConfigurationError as exc:
        return _fail(EXIT_CONFIG, "configuration", exc)
    except DivergenceError as exc:
        return _fail(EXIT_CONFIG, "divergence", exc)
    except ValueError as exc:
        return _fail(EXIT_CONFIG, "invalid-input", exc)
    except OSError as exc:
        return _fail(EXIT_IO, "io", exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
