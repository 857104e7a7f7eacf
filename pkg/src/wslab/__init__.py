"""Walk-based local search laboratory for random k-SAT.

The package has three layers: instance handling and the walk itself
(cnf, engine, trajectory), solution-space structure checks (landscape),
and closed-form rates and thresholds (analytics).  harness and cli sit on
top for batch experiments.
"""

from .rng import SplitMix64, derive_seed, mix64, stream_words, bounded
from .cnf import (Formula, DimacsError, sample_uniform, sample_binomial,
                  random_assignment, pack_assignment, unpack_assignment,
                  assignment_to_hex, assignment_from_hex, clause_true_counts,
                  unsat_set, unsat_count, is_satisfying, parse_dimacs,
                  write_dimacs, formula_to_json, formula_from_json,
                  dump_formula_json, load_formula_json)
from .engine import (WalksatState, RunOutcome, SuccessEstimate, run,
                     estimate_success, occurrence_index)
from .trajectory import (Trajectory, detect_H_events, drift_series, ring_bounds)
from .landscape import (kappa, ring_radius, dist, delta, Ring, TThreshold, in_T,
                        enumerate_T, X, Mist, build_mist, MistCheck, verify_mist,
                        check_Q1, check_Q2, check_Q3, clause_space_size,
                        clause_space_intersection)
from .analytics import (kl, binomial_tail_rate, walk_rate, wilson_interval,
                        DensityParams, thresholds, first_moment_logT,
                        q2_exponent, q3_exponent, success_budget,
                        log_sat_count_estimate, drift_summary)
from .harness import (OmegaPolicy, parse_omega, ExperimentConfig, ExperimentRow,
                      run_sweep, run_cell, gen_formulas, verify_formula,
                      sample_planted, drift_experiment, bounds_table)

__version__ = "0.1.0"

__all__ = [
    "SplitMix64", "derive_seed", "mix64", "stream_words", "bounded",
    "Formula", "DimacsError", "sample_uniform", "sample_binomial",
    "random_assignment", "pack_assignment", "unpack_assignment",
    "assignment_to_hex", "assignment_from_hex", "clause_true_counts",
    "unsat_set", "unsat_count", "is_satisfying", "parse_dimacs",
    "write_dimacs", "formula_to_json", "formula_from_json",
    "dump_formula_json", "load_formula_json",
    "WalksatState", "RunOutcome", "SuccessEstimate", "run",
    "estimate_success", "occurrence_index",
    "Trajectory", "detect_H_events", "drift_series", "ring_bounds",
    "kappa", "ring_radius", "dist", "delta", "Ring", "TThreshold", "in_T",
    "enumerate_T", "X", "Mist", "build_mist", "MistCheck", "verify_mist",
    "check_Q1", "check_Q2", "check_Q3", "clause_space_size",
    "clause_space_intersection",
    "kl", "binomial_tail_rate", "walk_rate", "wilson_interval",
    "DensityParams", "thresholds", "first_moment_logT", "q2_exponent",
    "q3_exponent", "success_budget", "log_sat_count_estimate", "drift_summary",
    "OmegaPolicy", "parse_omega", "ExperimentConfig", "ExperimentRow",
    "run_sweep", "run_cell", "gen_formulas", "verify_formula",
    "sample_planted", "drift_experiment", "bounds_table",
    "__version__",
]
