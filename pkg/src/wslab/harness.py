"""Experiment orchestration: formula generation, success-rate sweeps,
structure verification, drift runs, and threshold tables.

Reproducibility contract: every cell of a sweep is addressed by its index in
the config's cell enumeration (n-major, then alpha), and trial t of cell c
uses formula seed derive_seed(master, c, t, 0) and run seed
derive_seed(master, c, t, 1).  Results therefore never depend on the worker
count, and a sweep can resume from a partial CSV cell by cell.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analytics
from .analytics import success_budget, thresholds
from .cnf import (Formula, assignment_to_hex, dump_formula_json,
                  random_assignment, sample_binomial, sample_uniform,
                  unsat_count, write_dimacs)
from .engine import run, summarize_runs, occurrence_index
from . import _kernels
from .landscape import (TThreshold, build_mist, check_Q1, check_Q2, check_Q3,
                        enumerate_T, verify_mist)
from .rng import SplitMix64, derive_seed
from .trajectory import detect_H_events, drift_series

CSV_COLUMNS = ["n", "k", "m", "alpha", "omega", "trials", "successes",
               "success_rate", "wilson_low", "wilson_high",
               "mean_steps_success", "mean_final_unsat_failure",
               "wall_time_s", "master_seed"]


class HarnessError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# flip budget policies

@dataclass(frozen=True)
class OmegaPolicy:
    """Flip budget as a function of instance size.

    kind "fixed" uses c flips, "linear" c*n, "quadratic" c*n^2, and "exp"
    uses ceil(exp(n/k^2)) capped at `cap` (the capped flag is reported so a
    truncated budget is never mistaken for the nominal one).
    """

    kind: str
    c: float = 0.0
    cap: int = 10 ** 9

    def budget(self, n: int, k: int) -> tuple[int, bool]:
        if self.kind == "fixed":
            return int(self.c), False
        if self.kind == "linear":
            return int(round(self.c * n)), False
        if self.kind == "quadratic":
            return int(round(self.c * n * n)), False
        if self.kind == "exp":
            sb = success_budget(n, k)
            if sb.omega is None or sb.omega > self.cap:
                return self.cap, True
            return sb.omega, False
        raise HarnessError(f"unknown omega policy {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "exp":
            return f"exp:{self.cap}"
        c = self.c
        c_text = str(int(c)) if float(c).is_integer() else repr(c)
        return f"{self.kind}:{c_text}"


def parse_omega(text: str) -> OmegaPolicy:
    """Accepts '25000' (fixed), 'fixed:25000', 'linear:10000', 'quadratic:100'
    and 'exp' or 'exp:CAP'."""
    text = str(text).strip()
    if ":" not in text:
        if text == "exp":
            return OmegaPolicy(kind="exp")
        try:
            return OmegaPolicy(kind="fixed", c=float(text))
        except ValueError:
            raise HarnessError(f"cannot parse omega policy {text!r}") from None
    kind, _, value = text.partition(":")
    if kind == "exp":
        return OmegaPolicy(kind="exp", cap=int(float(value)))
    if kind in ("fixed", "linear", "quadratic"):
        return OmegaPolicy(kind=kind, c=float(value))
    raise HarnessError(f"cannot parse omega policy {text!r}")


# ---------------------------------------------------------------------------
# sweep configuration

@dataclass
class ExperimentConfig:
    k: int
    n_values: list
    alphas: list
    omega: OmegaPolicy
    trials: int
    master_seed: int
    model: str = "uniform"

    def __post_init__(self):
        if self.model not in ("uniform", "binomial"):
            raise HarnessError(f"unknown model {self.model!r}")
        if self.trials < 1:
            raise HarnessError("trials must be >= 1")

    def cells(self):
        """(cell_index, n, alpha) in n-major order; the index seeds the cell."""
        idx = 0
        for n in self.n_values:
            for alpha in self.alphas:
                yield idx, n, float(alpha)
                idx += 1

    def to_json(self) -> dict:
        return {"k": self.k, "n": list(self.n_values),
                "alpha": [float(a) for a in self.alphas],
                "omega": self.omega.describe(), "trials": self.trials,
                "master_seed": self.master_seed, "model": self.model}

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        n_values = obj["n"]
        if isinstance(n_values, int):
            n_values = [n_values]
        alphas = obj["alpha"]
        if isinstance(alphas, (int, float)):
            alphas = [alphas]
        return cls(k=int(obj["k"]), n_values=[int(n) for n in n_values],
                   alphas=[float(a) for a in alphas],
                   omega=parse_omega(obj["omega"]), trials=int(obj["trials"]),
                   master_seed=int(obj["master_seed"]),
                   model=obj.get("model", "uniform"))


@dataclass
class ExperimentRow:
    n: int
    k: int
    m: int
    alpha: float
    omega: int
    trials: int
    successes: int
    success_rate: float
    wilson_low: float
    wilson_high: float
    mean_steps_success: float      # nan when no trial succeeded
    mean_final_unsat_failure: float  # nan when no trial failed
    wall_time_s: float
    master_seed: int

    def to_csv(self) -> str:
        def num(x):
            return "" if isinstance(x, float) and math.isnan(x) else repr(float(x))
        cells = [str(self.n), str(self.k), str(self.m), repr(float(self.alpha)),
                 str(self.omega), str(self.trials), str(self.successes),
                 num(self.success_rate), num(self.wilson_low), num(self.wilson_high),
                 num(self.mean_steps_success), num(self.mean_final_unsat_failure),
                 f"{self.wall_time_s:.3f}", str(self.master_seed)]
        return ",".join(cells)

    @classmethod
    def from_csv(cls, line: str) -> "ExperimentRow":
        parts = line.rstrip("\n").split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise HarnessError(f"row has {len(parts)} fields, expected {len(CSV_COLUMNS)}")
        def fnum(s):
            return math.nan if s == "" else float(s)
        return cls(n=int(parts[0]), k=int(parts[1]), m=int(parts[2]),
                   alpha=float(parts[3]), omega=int(parts[4]), trials=int(parts[5]),
                   successes=int(parts[6]), success_rate=fnum(parts[7]),
                   wilson_low=fnum(parts[8]), wilson_high=fnum(parts[9]),
                   mean_steps_success=fnum(parts[10]),
                   mean_final_unsat_failure=fnum(parts[11]),
                   wall_time_s=float(parts[12]), master_seed=int(parts[13]))


def load_rows(path) -> list:
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        return []
    if lines[0] != ",".join(CSV_COLUMNS):
        raise HarnessError(f"unexpected CSV header in {path}")
    return [ExperimentRow.from_csv(ln) for ln in lines[1:]]


# ---------------------------------------------------------------------------
# sweep execution

def _sample_cell_formula(config: ExperimentConfig, n: int, m: int, seed: int) -> Formula:
    if config.model == "uniform":
        return sample_uniform(n, config.k, m, seed)
    return sample_binomial(n, config.k, m, seed)


def _run_cell_trial(config: ExperimentConfig, cell_idx: int, trial: int,
                    n: int, m: int, omega: int):
    formula = _sample_cell_formula(
        config, n, m, derive_seed(config.master_seed, cell_idx, trial, 0))
    occ_start, occ_clause, _ = occurrence_index(formula)
    sigma = np.empty(formula.n, dtype=np.uint8)
    true_count = np.empty(formula.m, dtype=np.int32)
    members = np.empty(max(formula.m, 1), dtype=np.int32)
    pos = np.empty(max(formula.m, 1), dtype=np.int32)
    run_seed = derive_seed(config.master_seed, cell_idx, trial, 1)
    return _kernels.run(formula.var, formula.neg, occ_start, occ_clause,
                        omega, np.uint64(run_seed), sigma, true_count,
                        members, pos)


def run_cell(config: ExperimentConfig, cell_idx: int, n: int, alpha: float,
             workers: int = 1) -> ExperimentRow:
    """Fresh formula per trial; trials are independent and individually seeded."""
    m = int(round(alpha * n))
    omega, _ = config.omega.budget(n, config.k)
    start = time.perf_counter()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda t: _run_cell_trial(config, cell_idx, t, n, m, omega),
                range(config.trials)))
    else:
        results = [_run_cell_trial(config, cell_idx, t, n, m, omega)
                   for t in range(config.trials)]
    est = summarize_runs(results, config.trials)
    return ExperimentRow(
        n=n, k=config.k, m=m, alpha=alpha, omega=omega, trials=config.trials,
        successes=est.successes, success_rate=est.fraction,
        wilson_low=est.wilson_low, wilson_high=est.wilson_high,
        mean_steps_success=est.mean_steps_success,
        mean_final_unsat_failure=est.mean_final_unsat_failure,
        wall_time_s=time.perf_counter() - start, master_seed=config.master_seed)


def _row_matches_cell(row: ExperimentRow, config: ExperimentConfig, n: int,
                      alpha: float, omega: int, m: int) -> bool:
    return (row.n == n and row.k == config.k and row.m == m
            and row.alpha == alpha and row.omega == omega
            and row.trials == config.trials
            and row.master_seed == config.master_seed)


def run_sweep(config: ExperimentConfig, out_path, workers: int = 1,
              resume: bool = False, progress=None) -> list:
    """Run every cell and append one CSV row per cell as it completes.

    Each row is written and flushed as a whole line, so an interrupted sweep
    leaves a valid prefix.  With resume=True, cells whose rows already sit in
    the file are skipped after checking that they came from this exact config;
    any disagreement is a conflict and raises.
    """
    out_path = Path(out_path)
    done = {}
    if out_path.exists():
        if not resume:
            raise HarnessError(f"{out_path} exists; pass resume=True to continue it")
        for row in load_rows(out_path):
            done[(row.n, row.alpha)] = row

    cell_list = list(config.cells())
    for idx, n, alpha in cell_list:
        m = int(round(alpha * n))
        omega, _ = config.omega.budget(n, config.k)
        prior = done.get((n, alpha))
        if prior is not None and not _row_matches_cell(prior, config, n, alpha, omega, m):
            raise HarnessError(
                f"resume conflict at cell n={n} alpha={alpha}: existing row "
                f"disagrees with the requested config")
    known_cells = {(n, float(alpha)) for _, n, alpha in cell_list}
    for key in done:
        if key not in known_cells:
            raise HarnessError(f"resume conflict: {out_path} has a row for cell "
                               f"{key} outside this config")

    rows = []
    new_file = not out_path.exists()
    with open(out_path, "a") as fh:
        if new_file:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        for idx, n, alpha in cell_list:
            prior = done.get((n, alpha))
            if prior is not None:
                rows.append(prior)
                continue
            row = run_cell(config, idx, n, alpha, workers=workers)
            rows.append(row)
            fh.write(row.to_csv() + "\n")
            fh.flush()
            os.fsync(fh.fileno())
            if progress is not None:
                progress(row)
    return rows


# ---------------------------------------------------------------------------
# formula generation

def gen_formulas(config: ExperimentConfig, out_dir, replicates: int = 1,
                 fmt: str = "dimacs") -> list:
    """One formula file per (cell, replicate).  DIMACS output carries a JSON
    metadata sidecar; fmt='json' writes the full clause envelope instead."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for idx, n, alpha in config.cells():
        m = int(round(alpha * n))
        for rep in range(replicates):
            seed = derive_seed(config.master_seed, idx, rep)
            formula = _sample_cell_formula(config, n, m, seed)
            stem = f"formula_k{config.k}_n{n}_a{alpha:g}_r{rep}"
            if fmt == "dimacs":
                cnf_path = out_dir / f"{stem}.cnf"
                cnf_path.write_text(write_dimacs(formula))
                meta = {"n": n, "k": config.k, "m": m, "seed": seed,
                        "model": config.model, "alpha": alpha, "replicate": rep}
                (out_dir / f"{stem}.json").write_text(json.dumps(meta, indent=2) + "\n")
                written.append(cnf_path)
            elif fmt == "json":
                path = out_dir / f"{stem}.json"
                path.write_text(dump_formula_json(formula, model=config.model,
                                                  seed=seed) + "\n")
                written.append(path)
            else:
                raise HarnessError(f"unknown gen format {fmt!r}")
    return written


# ---------------------------------------------------------------------------
# structure verification

def verify_formula(formula: Formula, n_limit: int = 24, q2_limit: int = 14,
                   q3_limit: int = 18, seed: int = 0) -> dict:
    """Full structural report: low-violation set, mist, both mist axioms,
    and the three quasirandomness checks."""
    if formula.n > n_limit:
        raise HarnessError(
            f"structure verification enumerates all 2^n assignments and is "
            f"limited to n <= {n_limit}; got n = {formula.n}")
    thr = TThreshold.of(formula)
    t_list = enumerate_T(formula, n_limit=n_limit)
    mist = build_mist(t_list, formula.n, formula.k)
    axioms = verify_mist(mist, t_list, formula.n, formula.k)
    q1 = check_Q1(formula, mist, n_limit=n_limit)
    q2 = check_Q2(formula, mist, n_limit=q2_limit, seed=derive_seed(seed, 2))
    q3 = check_Q3(formula, mist, n_limit=q3_limit, seed=derive_seed(seed, 3))
    return {
        "n": formula.n, "k": formula.k, "m": formula.m,
        "alpha": formula.m / formula.n,
        "cutoff": [thr.cutoff.numerator, thr.cutoff.denominator],
        "t_size": len(t_list),
        "mist": {
            "size": mist.size,
            "points_hex": [assignment_to_hex(p) for p in mist.points],
            "provenance": list(mist.provenance),
            "separated": axioms.separated,
            "covering": axioms.covering,
            "min_pairwise": axioms.min_pairwise,
            "max_cover_dist": axioms.max_cover_dist,
            "radius": axioms.radius,
        },
        "q1": {"count": q1.count, "threshold": q1.threshold, "ok": q1.ok,
               "radius": q1.radius},
        "q2": {"max_overlap": q2.max_overlap, "threshold": q2.threshold,
               "ok": q2.ok, "mode": q2.mode, "worst_tau_hex": q2.worst_tau_hex},
        "q3": {"worst_ratio": q3.worst_ratio, "ok": q3.ok, "mode": q3.mode,
               "checked": q3.checked, "witness_mu_hex": q3.witness_mu_hex,
               "witness_sigma_hex": q3.witness_sigma_hex},
    }


# ---------------------------------------------------------------------------
# planted instances and drift experiments

def sample_planted(n: int, k: int, m: int, seed: int):
    """Out-of-model sampler: draw a uniform formula and a uniform assignment,
    then resample the sign pattern of every clause the assignment falsifies
    until it is satisfied.  Returns (formula, planted_assignment).

    This biases the clause distribution (it is NOT the uniform model) but
    guarantees a known satisfying reference to measure drift against.
    """
    base = sample_uniform(n, k, m, derive_seed(seed, 0))
    tau = random_assignment(n, SplitMix64(derive_seed(seed, 1)))
    neg = base.neg.copy()
    stream = SplitMix64(derive_seed(seed, 2))
    for c in range(m):
        while bool((tau[base.var[c]] == neg[c]).all()):
            for j in range(k):
                neg[c, j] = stream.next64() & 1
    return Formula(n=n, k=k, var=base.var.copy(), neg=neg), tau


DRIFT_COLUMNS = ["trial", "seed", "status", "steps", "final_dist", "h_events",
                 "toward_fraction", "y_mean"]


def drift_experiment(formula: Formula, mu: np.ndarray, omega: int, trials: int,
                     master_seed: int) -> tuple:
    """Instrumented runs against a reference assignment.

    Returns (records, csv_text): per trial the number of ring-crossing window
    events, the fraction of distance-decreasing steps, and the mean drift
    increment (nan for a run with no steps).
    """
    thr = TThreshold.of(formula)

    def t_member(sigma):
        return thr.admits(unsat_count(formula, sigma))

    records = []
    lines = [",".join(DRIFT_COLUMNS)]
    for trial in range(trials):
        seed = derive_seed(master_seed, trial)
        outcome = run(formula, omega, seed, refs=[mu], record=True)
        traj = outcome.trajectory
        events = detect_H_events(traj, mu, t_member, formula.k)
        d = traj.distances_to(mu).astype(np.int64)
        if traj.rows > 1:
            diffs = d[1:] - d[:-1]
            toward = float((diffs == -1).mean())
            y = drift_series(traj, mu, t_member, formula.k)
            y_mean = float(y.mean())
        else:
            toward = math.nan
            y_mean = math.nan
        rec = {"trial": trial, "seed": seed, "status": outcome.status,
               "steps": outcome.steps_used, "final_dist": int(d[-1]),
               "h_events": len(events), "toward_fraction": toward,
               "y_mean": y_mean}
        records.append(rec)
        lines.append(",".join([
            str(trial), str(seed), outcome.status, str(outcome.steps_used),
            str(int(d[-1])), str(len(events)),
            "" if math.isnan(toward) else repr(toward),
            "" if math.isnan(y_mean) else repr(y_mean)]))
    return records, "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# threshold tables

BOUNDS_COLUMNS = ["k", "sat_threshold", "unsat_density", "walksat_linear_density",
                  "barrier_density", "stall_density", "vacuous", "rho_stall",
                  "q2_exponent_per_n", "q3_exponent_per_n",
                  "logT_exact_per_n", "logT_bound_per_n", "log_omega_per_n"]


def bounds_table(k_values, stall_coefficient: float = 195.0) -> list:
    """Density landmarks and per-variable exponents evaluated at the stall
    density, one dict per k."""
    rows = []
    for k in k_values:
        t = thresholds(k, stall_coefficient=stall_coefficient)
        rho_stall = stall_coefficient * math.log(k) ** 2 / k
        p = 2.0 ** -k
        alpha_stall = t.stall_density
        rows.append({
            "k": k,
            "sat_threshold": t.sat_threshold,
            "unsat_density": t.unsat_density,
            "walksat_linear_density": t.walksat_linear_density,
            "barrier_density": t.barrier_density,
            "stall_density": t.stall_density,
            "vacuous": t.vacuous,
            "rho_stall": rho_stall,
            "q2_exponent_per_n": analytics.q2_exponent(1, k, rho_stall),
            "q3_exponent_per_n": analytics.q3_exponent(1, k, rho_stall),
            "logT_exact_per_n": analytics.LN2 - alpha_stall * kl_for_bounds(p),
            "logT_bound_per_n": analytics.LN2 - rho_stall / 2.0,
            "log_omega_per_n": 1.0 / k ** 2,
        })
    return rows


def kl_for_bounds(p: float) -> float:
    return analytics.kl(0.1 * p, p)


def format_bounds(rows, fmt: str = "table") -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    if fmt == "csv":
        lines = [",".join(BOUNDS_COLUMNS)]
        for r in rows:
            lines.append(",".join(
                str(r[c]) if c in ("k", "vacuous") else f"{r[c]:.6g}"
                for c in BOUNDS_COLUMNS))
        return "\n".join(lines) + "\n"
    if fmt == "table":
        header = f"{'k':>4} {'sat':>12} {'unsat':>12} {'walk-lin':>12} " \
                 f"{'barrier':>12} {'stall':>12} {'vacuous':>8}"
        lines = [header]
        for r in rows:
            lines.append(
                f"{r['k']:>4} {r['sat_threshold']:>12.4g} {r['unsat_density']:>12.4g} "
                f"{r['walksat_linear_density']:>12.4g} {r['barrier_density']:>12.4g} "
                f"{r['stall_density']:>12.4g} {str(r['vacuous']):>8}")
        return "\n".join(lines) + "\n"
    raise HarnessError(f"unknown bounds format {fmt!r}")
