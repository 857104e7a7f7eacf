"""Closed-form rates, density thresholds, and exponent bookkeeping.

All tail probabilities are handled in log space; nothing here simulates.
The exact binomial tails are plain lgamma sums, so they stay meaningful far
below the smallest positive float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

LN2 = math.log(2.0)
_WILSON_Z = 1.959963984540054  # two-sided 95%


def kl(q: float, p: float) -> float:
    """Relative entropy between Bernoulli(q) and Bernoulli(p), in nats.

    The complement term uses log1p so the value stays accurate when p or q
    is below machine epsilon (densities like 2^-60 appear in the tables).
    """
    if not (0.0 < q < 1.0 and 0.0 < p < 1.0):
        raise ValueError("kl needs q and p strictly inside (0, 1)")
    return (q * (math.log(q) - math.log(p))
            + (1.0 - q) * (math.log1p(-q) - math.log1p(-p)))


def _log_binom_pmf(n: int, j: int, log_p: float, log_1p: float) -> float:
    return (math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)
            + j * log_p + (n - j) * log_1p)


def _logsumexp(values) -> float:
    hi = max(values)
    if hi == -math.inf:
        return -math.inf
    return hi + math.log(sum(math.exp(v - hi) for v in values))


@dataclass(frozen=True)
class TailRate:
    log_tail: float      # exact ln P of the requested binomial tail
    rate: float          # the large-deviation prediction -n * kl(q, p)
    n: int
    side: str


def binomial_tail_rate(n: int, p: float, q: float, side: str = "lower") -> TailRate:
    """Exact log-tail of Bin(n, p) beyond qn, next to its exponential rate.

    side="lower" gives ln P[X <= qn] and requires q < p; side="upper" gives
    ln P[X >= qn] and requires q > p.  As n grows, log_tail / n converges to
    -kl(q, p).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < p < 1.0:
        raise ValueError("p must be strictly inside (0, 1)")
    if side == "lower":
        if not 0.0 < q < p:
            raise ValueError("lower tail needs 0 < q < p")
        lo, hi = 0, math.floor(q * n)
    elif side == "upper":
        if not p < q < 1.0:
            raise ValueError("upper tail needs p < q < 1")
        lo, hi = math.ceil(q * n), n
    else:
        raise ValueError("side must be 'lower' or 'upper'")
    log_p = math.log(p)
    log_1p = math.log1p(-p)
    terms = [_log_binom_pmf(n, j, log_p, log_1p) for j in range(lo, hi + 1)]
    return TailRate(log_tail=_logsumexp(terms), rate=-n * kl(q, p), n=n, side=side)


def walk_rate(q: float, p: float) -> float:
    """Large-deviation rate for a lazy +-1 walk with up-probability p to gain
    at least qn over n steps.  Writing each increment as 2*Bernoulli(p) - 1
    turns the event into an upper binomial tail at level (1+q)/2, so the rate
    is kl((1+q)/2, p)."""
    if not 0.0 < p < 0.5:
        raise ValueError("p must be in (0, 1/2)")
    if q <= 0.0:
        raise ValueError("q must be positive")
    level = (1.0 + q) / 2.0
    if level >= 1.0:
        raise ValueError("q must keep (1+q)/2 below 1")
    return kl(level, p)


def wilson_interval(successes: int, trials: int, z: float = _WILSON_Z):
    """Wilson 95% score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes out of range")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = phat + z2 / (2.0 * trials)
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials))
    # rounding must never push an endpoint past the point estimate
    lo = min(max(0.0, (center - half) / denom), phat)
    hi = max(min(1.0, (center + half) / denom), phat)
    return lo, hi


# ---------------------------------------------------------------------------
# density landmarks

@dataclass(frozen=True)
class DensityParams:
    n: int
    m: int
    k: int

    @property
    def alpha(self) -> float:
        return self.m / self.n

    @property
    def rho(self) -> float:
        return self.m / (self.n * 2.0 ** self.k)

    @property
    def rho_exact(self) -> Fraction:
        return Fraction(self.m, self.n * 2 ** self.k)

    @property
    def kappa(self) -> float:
        return math.log(self.k) / self.k


@dataclass(frozen=True)
class ThresholdTable:
    """Clause-density landmarks for width k, all as m/n values.

    stall_density is the density above which the walk provably stalls for
    the given coefficient; it can exceed unsat_density for small k, in which
    case the stall statement is vacuous there and the flag says so.
    """

    k: int
    sat_threshold: float        # asymptotic satisfiability threshold
    unsat_density: float        # first-moment unsatisfiability bound, 2^k ln 2
    walksat_linear_density: float   # walk succeeds in linear time below this
    barrier_density: float      # where all known efficient algorithms stop
    stall_density: float        # coefficient * 2^k ln^2(k) / k
    stall_coefficient: float
    vacuous: bool


def thresholds(k: int, stall_coefficient: float = 195.0) -> ThresholdTable:
    if k < 3:
        raise ValueError("thresholds are defined for k >= 3")
    two_k = 2.0 ** k
    lnk = math.log(k)
    stall = stall_coefficient * two_k * lnk * lnk / k
    unsat = two_k * LN2
    return ThresholdTable(
        k=k,
        sat_threshold=two_k * LN2 - (1.0 + LN2) / 2.0,
        unsat_density=unsat,
        walksat_linear_density=two_k / (25.0 * k),
        barrier_density=two_k * lnk / k,
        stall_density=stall,
        stall_coefficient=stall_coefficient,
        vacuous=stall > unsat,
    )


@dataclass(frozen=True)
class FirstMomentT:
    """Expected-size exponent of the low-violation set.

    log_count_exact is ln E|T| computed from the exact per-assignment tail
    exponent m * kl(rho_cut, 2^-k) with rho_cut = 0.1 * 2^-k; log_count_bound
    is the looser n ln 2 - rho n / 2 form.  exact <= bound always.
    """

    log_count_exact: float
    log_count_bound: float


def first_moment_logT(n: int, m: int, k: int) -> FirstMomentT:
    if n < 1 or k < 1 or m < 0:
        raise ValueError("need n >= 1, k >= 1, m >= 0")
    p = 2.0 ** -k
    rho = m / (n * 2.0 ** k)
    if m == 0:
        # cutoff admits everything, both forms collapse to n ln 2
        return FirstMomentT(log_count_exact=n * LN2, log_count_bound=n * LN2)
    exact = n * LN2 - m * kl(0.1 * p, p)
    bound = n * LN2 - rho * n / 2.0
    assert exact <= bound + 1e-9, "exact exponent should never exceed the bound form"
    return FirstMomentT(log_count_exact=exact, log_count_bound=bound)


def q2_exponent(n: int, k: int, rho: float) -> float:
    """Log of the first-moment bound on overloaded-ball centers:
    n * (10 ln^2 k - k rho / 15) for one center, plus n ln 2 for the union."""
    lnk = math.log(k)
    return n * (10.0 * lnk * lnk - k * rho / 15.0) + n * LN2


def q3_exponent(n: int, k: int, rho: float) -> float:
    """Log of the first-moment bound on occupation-check failures:
    n * (2 ln 2 - k rho / 10)."""
    return n * (2.0 * LN2 - k * rho / 10.0)


@dataclass(frozen=True)
class SuccessBudget:
    """Flip budget ceil(exp(n / k^2)) and the matching failure bound."""

    omega: int | None       # None when the exact integer was not materialized
    bound: float            # exp(-n / k^2), 0.0 once it underflows
    log_bound: float        # -n / k^2 exactly
    capped: bool


def success_budget(n: int, k: int, max_bits: int = 1_000_000) -> SuccessBudget:
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    x = n / k ** 2
    log_bound = -x
    bound = math.exp(log_bound) if log_bound > -745.0 else 0.0
    bits = x / LN2 + 64
    if bits > max_bits:
        return SuccessBudget(omega=None, bound=bound, log_bound=log_bound, capped=True)
    with mpmath.workprec(int(bits) + 16):
        omega = int(mpmath.ceil(mpmath.exp(mpmath.mpf(n) / (k * k))))
    return SuccessBudget(omega=omega, bound=bound, log_bound=log_bound, capped=False)


def log_sat_count_estimate(n: int, m: int, k: int) -> float:
    """ln of the expected number of satisfying assignments over the uniform
    model: each clause is falsified by a fixed assignment with probability
    2^-k independently, so ln E = n ln 2 + m ln(1 - 2^-k)."""
    if n < 1 or k < 1 or m < 0:
        raise ValueError("need n >= 1, k >= 1, m >= 0")
    return n * LN2 + m * math.log1p(-(2.0 ** -k))


# ---------------------------------------------------------------------------
# drift summaries

@dataclass(frozen=True)
class DriftSummary:
    count: int
    mean: float
    frac_toward: float              # fraction of -1 increments
    toward_low: float               # Wilson bounds on that fraction
    toward_high: float
    toward_at_most_tenth: bool      # consistent with the 1/10 toward bound
    mean_at_least_four_fifths: bool  # consistent with the 4/5 drift level


def drift_summary(y_series) -> DriftSummary:
    """Summary of a per-step drift increment series (values in {-1, +1, +3})."""
    y = np.asarray(y_series, dtype=np.float64)
    if y.size == 0:
        raise ValueError("empty drift series")
    toward = int((y == -1).sum())
    low, high = wilson_interval(toward, y.size)
    mean = float(y.mean())
    return DriftSummary(
        count=int(y.size), mean=mean, frac_toward=toward / y.size,
        toward_low=low, toward_high=high,
        toward_at_most_tenth=toward * 10 <= y.size,
        mean_at_least_four_fifths=mean >= 0.8 - 1e-12,
    )
