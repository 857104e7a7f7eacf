"""Command line interface.

Subcommands: gen, run, sweep, verify, drift, bounds, plot.  Common flags can
be defaulted through the environment: WSLAB_SEED, WSLAB_TRIALS, WSLAB_OMEGA,
WSLAB_WORKERS and WSLAB_MODEL are read when the flag is not given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .cnf import (assignment_from_hex, assignment_to_hex, load_formula_json,
                  parse_dimacs)
from .engine import estimate_success, run
from .harness import (ExperimentConfig, HarnessError, bounds_table,
                      drift_experiment, format_bounds, gen_formulas,
                      parse_omega, run_sweep, sample_planted, verify_formula)
from .rng import derive_seed


def _env(name, cast, fallback):
    raw = os.environ.get("WSLAB_" + name)
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError:
        raise SystemExit(f"bad WSLAB_{name} value {raw!r}")


def _int_list(text: str):
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        out.append(int(item))
    if not out:
        raise argparse.ArgumentTypeError("empty integer list")
    return out


def _float_list(text: str):
    out = [float(item) for item in text.split(",") if item.strip()]
    if not out:
        raise argparse.ArgumentTypeError("empty float list")
    return out


def _emit(text: str, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_formula(path):
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        return load_formula_json(text)
    return parse_dimacs(text)


def _formula_from_args(args, seed_path=0):
    """Either load --formula, or sample from --n/--k and --alpha or --m."""
    if getattr(args, "formula", None):
        return _load_formula(args.formula)
    if args.n is None or args.k is None:
        raise SystemExit("need --formula, or --n and --k with --alpha or --m")
    if getattr(args, "m", None) is not None:
        m = args.m
    elif getattr(args, "alpha", None) is not None:
        m = int(round(args.alpha * args.n))
    else:
        raise SystemExit("need --alpha or --m to size the formula")
    from .cnf import sample_binomial, sample_uniform
    sampler = sample_uniform if args.model == "uniform" else sample_binomial
    return sampler(args.n, args.k, m, derive_seed(args.seed, seed_path))


def _add_formula_source(p, with_model=True):
    p.add_argument("--formula", help="DIMACS .cnf or formula .json file")
    p.add_argument("--n", type=int, help="variable count when sampling")
    p.add_argument("--k", type=int, help="clause width when sampling")
    p.add_argument("--alpha", type=float, help="clause density m/n")
    p.add_argument("--m", type=int, help="clause count (overrides --alpha)")
    if with_model:
        p.add_argument("--model", default=_env("MODEL", str, "uniform"),
                       choices=["uniform", "binomial"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wslab",
        description="Random k-SAT walk laboratory: generate instances, run "
                    "the walk, sweep densities, and check landscape structure.")
    sub = parser.add_subparsers(dest="command", required=True)
    seed_default = _env("SEED", int, 0)
    trials_default = _env("TRIALS", int, 100)
    workers_default = _env("WORKERS", int, 1)
    omega_default = _env("OMEGA", str, None)

    p = sub.add_parser("gen", help="write formula files")
    p.add_argument("--n", type=_int_list, required=True, help="comma list")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=_float_list, required=True, help="comma list")
    p.add_argument("--count", type=int, default=1, help="replicates per cell")
    p.add_argument("--model", default=_env("MODEL", str, "uniform"),
                   choices=["uniform", "binomial"])
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--out", default="formulas", help="output directory")
    p.add_argument("--format", default="dimacs", choices=["dimacs", "json"])

    p = sub.add_parser("run", help="single walk run, JSON result on stdout")
    _add_formula_source(p)
    p.add_argument("--omega", default=omega_default, required=omega_default is None,
                   help="flip budget: N, fixed:N, linear:C, quadratic:C, exp[:CAP]")
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--trials", type=int, default=None,
                   help="if given, report a success estimate over this many runs")
    p.add_argument("--workers", type=int, default=workers_default)
    p.add_argument("--witness", action="store_true",
                   help="include the satisfying assignment as hex")

    p = sub.add_parser("sweep", help="success-rate sweep over (n, alpha) cells")
    p.add_argument("--config", help="JSON config file; replaces the cell flags below")
    p.add_argument("--n", type=_int_list, help="comma list")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=_float_list, help="comma list")
    p.add_argument("--omega", default=omega_default)
    p.add_argument("--trials", type=int, default=trials_default)
    p.add_argument("--model", default=_env("MODEL", str, "uniform"),
                   choices=["uniform", "binomial"])
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--workers", type=int, default=workers_default)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--plot", help="also render a success-rate SVG here")
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("verify", help="structure report (JSON) for one formula")
    _add_formula_source(p)
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--limit", type=int, default=24,
                   help="max n for exhaustive low-violation enumeration")
    p.add_argument("--q2-limit", type=int, default=14)
    p.add_argument("--q3-limit", type=int, default=18)
    p.add_argument("--out", help="write the report here instead of stdout")

    p = sub.add_parser("drift", help="instrumented runs against a reference")
    _add_formula_source(p)
    p.add_argument("--ref-hex", help="reference assignment (hex, n bits)")
    p.add_argument("--planted", action="store_true",
                   help="plant a satisfying reference into the sampled formula")
    p.add_argument("--omega", default=omega_default, required=omega_default is None)
    p.add_argument("--trials", type=int, default=trials_default)
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--out", help="CSV output path (default stdout)")

    p = sub.add_parser("bounds", help="density landmark table per k")
    p.add_argument("--k", type=_int_list, required=True, help="comma list")
    p.add_argument("--stall-coeff", type=float, default=195.0)
    p.add_argument("--format", default="table", choices=["table", "csv", "json"])
    p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("plot", help="render figures from a sweep CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True, help="SVG output path")
    p.add_argument("--kind", default="success", choices=["success", "steps"])
    p.add_argument("--title")

    return parser


def _resolve_omega(args, n: int, k: int) -> int:
    policy = parse_omega(args.omega)
    omega, capped = policy.budget(n, k)
    if capped:
        print(f"note: flip budget capped at {omega}", file=sys.stderr)
    return omega


def cmd_gen(args) -> int:
    config = ExperimentConfig(k=args.k, n_values=args.n, alphas=args.alpha,
                              omega=parse_omega("0"), trials=1,
                              master_seed=args.seed, model=args.model)
    paths = gen_formulas(config, args.out, replicates=args.count, fmt=args.format)
    for path in paths:
        print(path)
    return 0


def cmd_run(args) -> int:
    formula = _formula_from_args(args, seed_path=0)
    omega = _resolve_omega(args, formula.n, formula.k)
    if args.trials is not None:
        est = estimate_success(formula, omega, args.trials,
                               derive_seed(args.seed, 1), workers=args.workers)
        print(json.dumps({
            "n": formula.n, "k": formula.k, "m": formula.m, "omega": omega,
            "trials": est.trials, "successes": est.successes,
            "success_rate": est.fraction, "wilson_low": est.wilson_low,
            "wilson_high": est.wilson_high}))
        return 0
    outcome = run(formula, omega, derive_seed(args.seed, 1))
    payload = outcome.to_json()
    payload["omega"] = omega
    if args.witness and outcome.witness is not None:
        payload["witness_hex"] = assignment_to_hex(outcome.witness)
    print(json.dumps(payload))
    return 0


def cmd_sweep(args) -> int:
    if args.config:
        config = ExperimentConfig.from_json(json.loads(Path(args.config).read_text()))
    else:
        if not (args.n and args.k and args.alpha and args.omega):
            raise SystemExit("sweep needs --config, or --n --k --alpha --omega")
        config = ExperimentConfig(k=args.k, n_values=args.n, alphas=args.alpha,
                                  omega=parse_omega(args.omega),
                                  trials=args.trials, master_seed=args.seed,
                                  model=args.model)
    progress = None
    if not args.quiet:
        def progress(row):
            print(f"n={row.n} alpha={row.alpha} -> {row.successes}/{row.trials} "
                  f"({row.wall_time_s:.2f}s)", file=sys.stderr)
    rows = run_sweep(config, args.out, workers=args.workers,
                     resume=args.resume, progress=progress)
    if args.plot:
        from .plotting import plot_success_rates
        plot_success_rates(args.out, args.plot)
    if not args.quiet:
        print(f"{len(rows)} cells -> {args.out}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    formula = _formula_from_args(args, seed_path=0)
    report = verify_formula(formula, n_limit=args.limit, q2_limit=args.q2_limit,
                            q3_limit=args.q3_limit, seed=args.seed)
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return 0


def cmd_drift(args) -> int:
    if args.planted:
        if args.formula:
            raise SystemExit("--planted samples its own formula; drop --formula")
        if args.n is None or args.k is None:
            raise SystemExit("--planted needs --n and --k with --alpha or --m")
        m = args.m if args.m is not None else int(round(args.alpha * args.n))
        formula, mu = sample_planted(args.n, args.k, m, derive_seed(args.seed, 0))
    else:
        formula = _formula_from_args(args, seed_path=0)
        if not args.ref_hex:
            raise SystemExit("need --ref-hex or --planted for the reference")
        mu = assignment_from_hex(args.ref_hex, formula.n)
    omega = _resolve_omega(args, formula.n, formula.k)
    _, csv_text = drift_experiment(formula, mu, omega, args.trials,
                                   derive_seed(args.seed, 1))
    _emit(csv_text, args.out)
    return 0


def cmd_bounds(args) -> int:
    rows = bounds_table(args.k, stall_coefficient=args.stall_coeff)
    _emit(format_bounds(rows, fmt=args.format), args.out)
    return 0


def cmd_plot(args) -> int:
    from .plotting import plot_steps, plot_success_rates
    fn = plot_success_rates if args.kind == "success" else plot_steps
    fn(args.csv, args.out, title=args.title)
    return 0


_COMMANDS = {"gen": cmd_gen, "run": cmd_run, "sweep": cmd_sweep,
             "verify": cmd_verify, "drift": cmd_drift, "bounds": cmd_bounds,
             "plot": cmd_plot}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except HarnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
