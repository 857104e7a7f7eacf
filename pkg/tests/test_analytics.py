"""Closed-form rates and thresholds against exact-arithmetic oracles."""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

import oracles
from wslab.analytics import (DensityParams, binomial_tail_rate, drift_summary,
                             first_moment_logT, kl, log_sat_count_estimate,
                             q2_exponent, q3_exponent, success_budget,
                             thresholds, walk_rate, wilson_interval)


def test_kl_against_high_precision():
    for q, p in ((0.5, 0.25), (0.2, 0.3), (0.01, 0.5), (0.9, 0.2),
                 (0.3, 0.3001)):
        assert kl(q, p) == pytest.approx(oracles.exact_kl(q, p), abs=1e-13)
    assert kl(0.5, 0.25) == pytest.approx(0.14384103622589045, abs=1e-15)
    assert kl(0.3, 0.3) == 0.0


def test_kl_survives_subnormal_densities():
    # p = 2^-60 sits far below machine epsilon; the complement term must
    # not cancel away (it dominates the value)
    p = 2.0 ** -60
    want = oracles.exact_kl(0.1 * p, p)
    assert kl(0.1 * p, p) == pytest.approx(want, rel=1e-12)
    assert kl(0.1 * p, p) > 0


def test_kl_domain():
    with pytest.raises(ValueError):
        kl(0.0, 0.5)
    with pytest.raises(ValueError):
        kl(0.5, 1.0)
    with pytest.raises(ValueError):
        kl(-0.1, 0.5)


def test_binomial_tail_exact_log_probability():
    # small n: the log-tail must match an exact Fraction computation
    for n, p, q, side in ((20, 0.3, 0.2, "lower"), (20, 0.3, 0.45, "upper"),
                          (35, 0.5, 0.2, "lower"), (35, 0.1, 0.3, "upper")):
        got = binomial_tail_rate(n, p, q, side=side)
        want = oracles.exact_binomial_tail(n, Fraction(p).limit_denominator(100),
                                           q, side)
        assert got.log_tail == pytest.approx(want, abs=1e-10)
        assert got.rate == pytest.approx(-n * kl(q, p), abs=1e-12)


def test_binomial_tail_converges_to_rate():
    # the frozen Bin(500, 0.3) lower tail at q = 0.2
    got = binomial_tail_rate(500, 0.3, 0.2, side="lower")
    assert got.log_tail == pytest.approx(-15.126935680351549, rel=1e-12)
    resid = got.log_tail / 500 + kl(0.2, 0.3)
    assert abs(resid) < 0.005


def test_binomial_tail_domain():
    with pytest.raises(ValueError):
        binomial_tail_rate(100, 0.3, 0.4, side="lower")   # q >= p
    with pytest.raises(ValueError):
        binomial_tail_rate(100, 0.3, 0.2, side="upper")   # q <= p
    with pytest.raises(ValueError):
        binomial_tail_rate(100, 0.3, 0.2, side="sideways")
    with pytest.raises(ValueError):
        binomial_tail_rate(0, 0.3, 0.2)


def test_walk_rate_is_kl_of_shifted_argument():
    # the displacement substitution: rate of reaching qn is kl((1+q)/2, p)
    assert walk_rate(0.2, 0.1) == pytest.approx(oracles.exact_kl(0.6, 0.1),
                                                abs=1e-13)
    assert walk_rate(0.2, 0.1) == pytest.approx(0.7506835950503014, abs=1e-12)
    with pytest.raises(ValueError):
        walk_rate(1.5, 0.1)
    with pytest.raises(ValueError):
        walk_rate(0.2, 0.0)


def test_wilson_interval_matches_oracle():
    for s, t in ((7, 10), (0, 10), (10, 10), (1, 2), (250, 500), (499, 500)):
        lo, hi = wilson_interval(s, t)
        olo, ohi = oracles.wilson_bounds(s, t)
        assert lo == pytest.approx(olo, abs=1e-12)
        assert hi == pytest.approx(ohi, abs=1e-12)
        assert 0.0 <= lo <= s / t <= hi <= 1.0
    assert wilson_interval(7, 10) == (
        pytest.approx(0.39677814746114537), pytest.approx(0.8922087325936989))


def test_wilson_validates():
    with pytest.raises(ValueError):
        wilson_interval(5, 0)
    with pytest.raises(ValueError):
        wilson_interval(6, 5)


def test_density_params():
    d = DensityParams(n=100, m=555, k=3)
    assert d.alpha == 5.55
    assert d.rho_exact == Fraction(555, 800)
    assert d.rho == pytest.approx(0.69375)
    assert d.kappa == pytest.approx(math.log(3) / 3)


def test_thresholds_frozen_k3():
    t = thresholds(3)
    assert t.sat_threshold == pytest.approx(8 * math.log(2) - (1 + math.log(2)) / 2,
                                            abs=1e-15)
    assert t.sat_threshold == pytest.approx(4.69860385419959, abs=1e-12)
    assert t.unsat_density == pytest.approx(8 * math.log(2), abs=1e-15)
    assert t.walksat_linear_density == pytest.approx(8 / 75, abs=1e-15)
    assert t.barrier_density == pytest.approx((8 / 3) * math.log(3), abs=1e-12)
    assert t.stall_density == pytest.approx(195 * 8 * math.log(3) ** 2 / 3,
                                            abs=1e-9)
    assert t.vacuous          # stall far above the unsat density at k=3


def test_thresholds_ordering_and_vacuity_flag():
    for k in (3, 4, 5, 8, 12):
        t = thresholds(k)
        assert t.sat_threshold < t.unsat_density
        assert t.walksat_linear_density < t.barrier_density
        assert t.vacuous == (t.stall_density > t.unsat_density)
    with pytest.raises(ValueError):
        thresholds(2)
    custom = thresholds(5, stall_coefficient=1e-6)
    assert not custom.vacuous


def test_first_moment_logT():
    fm = first_moment_logT(100, 555, 3)
    p = 2.0 ** -3
    exact = 100 * math.log(2) - 555 * kl(0.1 * p, p)
    bound = 100 * math.log(2) - (555 / 800) * 100 / 2
    assert fm.log_count_exact == pytest.approx(exact, abs=1e-9)
    assert fm.log_count_bound == pytest.approx(bound, abs=1e-9)
    assert fm.log_count_exact <= fm.log_count_bound + 1e-9
    empty = first_moment_logT(50, 0, 3)
    assert empty.log_count_exact == pytest.approx(50 * math.log(2))
    assert empty.log_count_bound == pytest.approx(50 * math.log(2))


def test_exponents_formulas_and_signs():
    for k in (20, 30, 40, 60):
        rho = 195 * math.log(k) ** 2 / k
        q2 = q2_exponent(1, k, rho)
        q3 = q3_exponent(1, k, rho)
        lk2 = math.log(k) ** 2
        assert q2 == pytest.approx(10 * lk2 - k * rho / 15 + math.log(2), rel=1e-12)
        assert q3 == pytest.approx(2 * math.log(2) - k * rho / 10, rel=1e-12)
        assert q2 < 0 and q3 < 0
        # scaling in n is linear
        assert q2_exponent(7, k, rho) == pytest.approx(7 * q2, rel=1e-12)


def test_success_budget_frozen():
    b = success_budget(100, 5)
    assert b.omega == 55                      # ceil(e^4)
    assert b.log_bound == pytest.approx(-4.0)
    assert b.bound == pytest.approx(math.exp(-4.0), rel=1e-12)
    assert not b.capped
    assert success_budget(25, 5).omega == 3   # ceil(e)
    assert success_budget(0, 5).omega == 1
    # exactness of the big-integer ceiling against mpmath at high precision
    for n, k in ((400, 4), (900, 5), (50, 3)):
        b = success_budget(n, k)
        with mpmath.workprec(max(80, int(n / k ** 2 / math.log(2)) + 80)):
            want = int(mpmath.ceil(mpmath.e ** (mpmath.mpf(n) / k ** 2)))
        assert b.omega == want


def test_success_budget_cap():
    b = success_budget(10 ** 7, 3, max_bits=1000)
    assert b.capped and b.omega is None
    assert b.log_bound == pytest.approx(-(10 ** 7) / 9)


def test_log_sat_count_estimate():
    got = log_sat_count_estimate(100, 200, 3)
    want = float(100 * mpmath.log(2) + 200 * mpmath.log(1 - mpmath.mpf(1) / 8))
    assert got == pytest.approx(want, abs=1e-12)
    assert got == pytest.approx(42.608439531090006, abs=1e-10)


def test_drift_summary_flag_semantics():
    # 10% of steps toward, mean exactly 0.8: both comparisons pass at equality
    y = np.array([-1] * 10 + [1] * 90, dtype=np.int8)
    assert float(y.mean()) == 0.8
    s = drift_summary(y)
    assert s.count == 100
    assert s.frac_toward == pytest.approx(0.1)
    assert s.toward_at_most_tenth
    assert s.mean_at_least_four_fifths
    # one more toward step breaks both comparisons
    y2 = np.array([-1] * 11 + [1] * 89, dtype=np.int8)
    assert not drift_summary(y2).toward_at_most_tenth
    assert not drift_summary(y2).mean_at_least_four_fifths
    lo, hi = s.toward_low, s.toward_high
    olo, ohi = oracles.wilson_bounds(10, 100)
    assert lo == pytest.approx(olo, abs=1e-12)
    assert hi == pytest.approx(ohi, abs=1e-12)


def test_drift_summary_empty_raises():
    with pytest.raises(ValueError):
        drift_summary(np.array([], dtype=np.int8))
