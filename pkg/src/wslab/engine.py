"""The walk itself.

One run: draw a uniform start assignment, then repeat up to omega times:
stop if the current assignment satisfies the formula, otherwise pick an
unsatisfied clause slot uniformly (duplicate clauses count separately), pick
one of its k positions uniformly, and flip that position's variable.  Exactly
one variable flips per step even when it repeats inside the clause.  A failed
run performed exactly omega flips.

The per-clause satisfied-literal counts and the unsatisfied set are maintained
incrementally; the cost of a flip is proportional to the flipped variable's
occurrence count.  cnf.clause_true_counts / cnf.unsat_set recompute the same
state from scratch and serve as the independent oracle in tests.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .cnf import Formula, random_assignment
from .rng import SplitMix64, derive_seed
from .trajectory import Trajectory, TrajectoryRecorder


def occurrence_index(formula: Formula):
    """CSR occurrence lists keyed by literal code 2*var + negated.

    Returns (occ_start, occ_clause, occ_pos): literal code L occupies slots
    occ_start[L]:occ_start[L+1], each slot naming a (clause, position) pair.
    A variable repeated in a clause contributes one slot per position.
    """
    codes = (2 * formula.var.astype(np.int64) + formula.neg).ravel()
    order = np.argsort(codes, kind="stable")
    occ_clause = (order // formula.k).astype(np.int32)
    occ_pos = (order % formula.k).astype(np.int32)
    counts = np.bincount(codes, minlength=2 * formula.n)
    occ_start = np.zeros(2 * formula.n + 1, dtype=np.int64)
    np.cumsum(counts, out=occ_start[1:])
    return occ_start, occ_clause, occ_pos


class WalksatState:
    """Incremental walk state over a fixed formula."""

    def __init__(self, formula: Formula, sigma: np.ndarray):
        if len(sigma) != formula.n:
            raise ValueError("assignment length differs from n")
        self.formula = formula
        self.sigma = np.array(sigma, dtype=np.uint8)
        self.occ_start, self.occ_clause, self.occ_pos = occurrence_index(formula)
        self.true_count = np.empty(formula.m, dtype=np.int32)
        self.members = np.empty(max(formula.m, 1), dtype=np.int32)
        self.pos = np.empty(max(formula.m, 1), dtype=np.int32)
        self.size = int(_kernels.build_state(formula.var, formula.neg, self.sigma,
                                             self.true_count, self.members, self.pos))
        self.steps_taken = 0

    def unsat_size(self) -> int:
        return self.size

    def unsat_indices(self) -> np.ndarray:
        """Current unsatisfied clause indices, sorted."""
        return np.sort(self.members[:self.size].copy())

    def is_satisfying(self) -> bool:
        return self.size == 0

    def occurrences(self, lit_code: int):
        """(clause, position) pairs for literal code 2*var + negated."""
        lo, hi = self.occ_start[lit_code], self.occ_start[lit_code + 1]
        return list(zip(self.occ_clause[lo:hi].tolist(), self.occ_pos[lo:hi].tolist()))

    def step(self, stream: SplitMix64) -> int:
        """Perform one flip, drawing from the stream; returns the flipped variable."""
        v, _, _ = self.step_detail(stream)
        return v

    def step_detail(self, stream: SplitMix64):
        """Like step() but also returns the chosen clause index and new unsat count."""
        if self.size == 0:
            raise RuntimeError("step on a satisfying state is a contract violation")
        f = self.formula
        v, c, size, state = _kernels.step(
            f.var, f.neg, self.occ_start, self.occ_clause, self.sigma,
            self.true_count, self.members, self.pos, self.size,
            np.uint64(stream.state))
        stream.state = int(state)
        self.size = int(size)
        self.steps_taken += 1
        return int(v), int(c), self.size


@dataclass
class RunOutcome:
    status: str                      # "sat" or "failure"
    steps_used: int
    final_unsat: int
    seed: int
    witness: np.ndarray | None = None
    trajectory: Trajectory | None = field(default=None, repr=False)

    @property
    def satisfied(self) -> bool:
        return self.status == "sat"

    def to_json(self) -> dict:
        return {"status": self.status, "steps_used": self.steps_used,
                "final_unsat": self.final_unsat, "seed": self.seed}


def run(formula: Formula, omega: int, seed: int, refs=(), record: bool = False,
        stride: int = 1) -> RunOutcome:
    """One walk run with flip budget omega.

    refs is a sequence of reference assignments whose Hamming distances are
    tracked per step when recording.  record=True attaches a Trajectory;
    stride > 1 down-samples it (stride 1 is required by the event detectors).
    """
    if omega < 0:
        raise ValueError("omega must be >= 0")
    refs = [np.asarray(r, dtype=np.uint8) for r in refs]
    for r in refs:
        if len(r) != formula.n:
            raise ValueError("reference assignment length differs from n")
    if not record and not refs:
        return _run_fast(formula, omega, seed)
    return _run_instrumented(formula, omega, seed, refs, record, stride)


def _run_fast(formula: Formula, omega: int, seed: int) -> RunOutcome:
    occ_start, occ_clause, _ = occurrence_index(formula)
    sigma = np.empty(formula.n, dtype=np.uint8)
    true_count = np.empty(formula.m, dtype=np.int32)
    members = np.empty(max(formula.m, 1), dtype=np.int32)
    pos = np.empty(max(formula.m, 1), dtype=np.int32)
    found, flips, final_unsat = _kernels.run(
        formula.var, formula.neg, occ_start, occ_clause, omega,
        np.uint64(seed & (2 ** 64 - 1)), sigma, true_count, members, pos)
    return RunOutcome(status="sat" if found else "failure", steps_used=int(flips),
                      final_unsat=int(final_unsat), seed=seed,
                      witness=sigma.copy() if found else None)


def _run_instrumented(formula: Formula, omega: int, seed: int, refs,
                      record: bool, stride: int) -> RunOutcome:
    if stride < 1:
        raise ValueError("stride must be >= 1")
    stream = SplitMix64(seed)
    state = WalksatState(formula, random_assignment(formula.n, stream))
    sigma = state.sigma      # the live buffer; the constructor copies its input
    dists = [int((sigma != r).sum()) for r in refs]
    recorder = TrajectoryRecorder(formula.n, sigma, refs, stride) if record else None
    if recorder is not None:
        recorder.append(0, -1, state.size, dists)

    flips = 0
    while state.size > 0 and flips < omega:
        v = state.step(stream)
        flips += 1
        for i, r in enumerate(refs):
            dists[i] += 1 if sigma[v] != r[v] else -1
        if recorder is not None:
            recorder.append(flips, v, state.size, dists)

    status = "sat" if state.size == 0 else "failure"
    return RunOutcome(
        status=status, steps_used=flips, final_unsat=state.size, seed=seed,
        witness=sigma.copy() if state.size == 0 else None,
        trajectory=recorder.finish() if recorder is not None else None)


@dataclass
class SuccessEstimate:
    successes: int
    trials: int
    fraction: float
    wilson_low: float
    wilson_high: float
    mean_steps_success: float     # nan when nothing succeeded
    mean_final_unsat_failure: float   # nan when nothing failed


def estimate_success(formula: Formula, omega: int, trials: int, master_seed: int,
                     workers: int = 1) -> SuccessEstimate:
    """Success fraction over independent runs with per-trial seeds
    derive_seed(master_seed, trial).  Results do not depend on workers."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    occ_start, occ_clause, _ = occurrence_index(formula)

    def one(trial: int):
        sigma = np.empty(formula.n, dtype=np.uint8)
        true_count = np.empty(formula.m, dtype=np.int32)
        members = np.empty(max(formula.m, 1), dtype=np.int32)
        pos = np.empty(max(formula.m, 1), dtype=np.int32)
        return _kernels.run(formula.var, formula.neg, occ_start, occ_clause,
                            omega, np.uint64(derive_seed(master_seed, trial)),
                            sigma, true_count, members, pos)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(trials)))
    else:
        results = [one(t) for t in range(trials)]
    return summarize_runs(results, trials)


def summarize_runs(results, trials: int) -> SuccessEstimate:
    """Aggregate (found, flips, final_unsat) triples in trial order."""
    from .analytics import wilson_interval

    successes = sum(1 for found, _, _ in results if found)
    steps = [flips for found, flips, _ in results if found]
    fails = [final for found, _, final in results if not found]
    low, high = wilson_interval(successes, trials)
    return SuccessEstimate(
        successes=successes, trials=trials, fraction=successes / trials,
        wilson_low=low, wilson_high=high,
        mean_steps_success=float(np.mean(steps)) if steps else math.nan,
        mean_final_unsat_failure=float(np.mean(fails)) if fails else math.nan)
