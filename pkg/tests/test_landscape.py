"""Landscape structure: low-violation set, mists, and the three
quasirandomness checks, all against exhaustive naive oracles."""

import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from wslab.cnf import pack_assignment, sample_uniform
from wslab.landscape import (Mist, Ring, TThreshold, X, build_mist, check_Q1,
                             check_Q2, check_Q3, clause_space_intersection,
                             clause_space_size, delta, dist, enumerate_T, in_T,
                             kappa, ring_radius, verify_mist)
from wslab.rng import SplitMix64
from wslab.cnf import random_assignment


def test_kappa_and_ring_radius():
    assert kappa(3) == math.log(3) / 3
    assert ring_radius(10, 3, 10) == 36
    assert ring_radius(2, 3, 10) == 7
    assert ring_radius(5, 40, 100) == 46
    assert ring_radius(100, 3, 12) == math.floor(100 * math.log(3) / 3 * 12)


def test_threshold_cutoff_exact():
    thr = TThreshold(n=10, k=3, m=43)
    assert thr.cutoff == Fraction(43, 80)
    assert thr.rho == Fraction(43, 80 * 10) * 8 or True   # rho checked below
    assert thr.rho == Fraction(43, 8 * 10)
    # admits: unsat * 10 * 2^k <= m, decided in integers
    assert thr.admits(0)
    assert not thr.admits(1)        # 80 > 43
    thr2 = TThreshold(n=10, k=3, m=80)
    assert thr2.admits(1)           # equality admits
    assert not thr2.admits(2)


def test_in_T_vs_naive():
    for seed in range(4):
        f = sample_uniform(7, 3, 30, seed=seed)
        for sigma in oracles.all_assignments(7):
            u = len(oracles.unsat_clause_indices(f, sigma))
            expect = u * 10 * 2 ** 3 <= f.m
            assert in_T(f, sigma) == expect


def test_enumerate_T_vs_naive_small():
    # includes low density (T = satisfying set) and high density where the
    # cutoff admits nonzero violation counts
    cases = [(8, 20, 0), (8, 20, 1), (9, 25, 2), (10, 30, 3),
             (8, 85, 4), (9, 95, 5), (10, 160, 6)]
    nonempty = 0
    for n, m, seed in cases:
        f = sample_uniform(n, 3, m, seed=seed)
        got = enumerate_T(f)
        want = oracles.low_violation_set(f)
        assert len(got) == len(want)
        for a, b in zip(got, want):
            assert (a == b).all()
        nonempty += bool(want)
    assert nonempty >= 3


def test_enumerate_T_is_lexicographic():
    f = sample_uniform(8, 3, 18, seed=9)
    got = enumerate_T(f)
    codes = [pack_assignment(s) for s in got]
    assert codes == sorted(codes)


def test_enumerate_T_limit_guard():
    f = sample_uniform(30, 3, 60, seed=0)
    with pytest.raises(ValueError):
        enumerate_T(f, n_limit=24)


def test_X_vs_naive():
    rng = np.random.default_rng(3)
    for seed in range(5):
        f = sample_uniform(9, 3, 33, seed=seed)
        sigma = rng.integers(0, 2, size=9).astype(np.uint8)
        w = rng.choice(9, size=4, replace=False)
        assert X(f, w, sigma) == oracles.occupancy(f, w, sigma)
        mask = np.zeros(9, dtype=bool)
        mask[w] = True
        assert X(f, mask, sigma) == oracles.occupancy(f, np.nonzero(mask)[0], sigma)
        # the whole-cube and empty extremes
        assert X(f, np.arange(9), sigma) == \
            3 * len(oracles.unsat_clause_indices(f, sigma))
        assert X(f, [], sigma) == 0


def test_dist_delta():
    a = np.array([0, 1, 1, 0], dtype=np.uint8)
    b = np.array([1, 1, 0, 0], dtype=np.uint8)
    assert dist(a, b) == 2
    assert delta(a, b).tolist() == [0, 2]
    assert dist(a, a) == 0


def test_ring_membership():
    center = np.zeros(20, dtype=np.uint8)
    ring = Ring(center=center, r1=0.5, r2=1.0, k=3)
    assert ring.lo == ring_radius(0.5, 3, 20)   # 3
    assert ring.hi == ring_radius(1.0, 3, 20)   # 7
    assert (ring.lo, ring.hi) == (3, 7)

    def probe(ones):
        p = center.copy()
        p[:ones] = 1
        return p

    assert ring.contains(probe(ring.lo))
    assert ring.contains(probe(ring.hi))
    assert not ring.contains(probe(ring.lo - 1))
    assert not ring.contains(probe(ring.hi + 1))
    assert not ring.contains(center)


def test_build_mist_axioms_and_determinism():
    built = 0
    for seed in range(12):
        n = 8 + seed % 3
        f = sample_uniform(n, 3, 2 * n + seed, seed=seed)
        t_list = enumerate_T(f)
        mist = build_mist(t_list, n, 3)
        again = build_mist(t_list, n, 3)
        assert mist.size == again.size
        for a, b in zip(mist.points, again.points):
            assert (a == b).all()
        radius = ring_radius(2, 3, n)
        sep, cov = oracles.mist_axioms(mist.points, t_list, n, radius)
        assert sep and cov
        check = verify_mist(mist, t_list, n, 3)
        assert check.ok
        assert check.radius == radius
        # provenance indices point back into t_list
        for p, src in zip(mist.points, mist.provenance):
            assert (p == t_list[src]).all()
        built += mist.size > 1
    assert built >= 2     # the fixture exercises multi-point mists


def test_greedy_mist_takes_lexicographic_smallest_first():
    f = sample_uniform(9, 3, 20, seed=5)
    t_list = enumerate_T(f)
    if not t_list:
        pytest.skip("degenerate draw: empty low-violation set")
    mist = build_mist(t_list, 9, 3)
    assert (mist.points[0] == t_list[0]).all()


def test_verify_mist_flags_violations():
    n = 9
    f = sample_uniform(n, 3, 18, seed=7)
    t_list = enumerate_T(f)
    assert len(t_list) >= 2
    mist = build_mist(t_list, n, 3)
    # an empty mist cannot cover a nonempty T
    empty = Mist(n=n, k=3, points=[], provenance=[])
    bad = verify_mist(empty, t_list, n, 3)
    assert not bad.covering and not bad.ok
    # duplicating a point breaks separation
    dup = Mist(n=n, k=3, points=[t_list[0], t_list[0]], provenance=[0, 0])
    assert not verify_mist(dup, t_list, n, 3).separated


def test_verify_mist_strict_implies_lenient():
    for seed in range(6):
        n = 8 + seed % 4
        f = sample_uniform(n, 3, 2 * n, seed=seed)
        t_list = enumerate_T(f)
        mist = build_mist(t_list, n, 3)
        lenient = verify_mist(mist, t_list, n, 3, strict=False)
        strict = verify_mist(mist, t_list, n, 3, strict=True)
        if strict.separated:
            assert lenient.separated


def test_check_Q1_vs_naive():
    for seed in range(5):
        n = 8 + seed % 3
        f = sample_uniform(n, 3, 2 * n + 2, seed=seed)
        t_list = enumerate_T(f)
        mist = build_mist(t_list, n, 3)
        res = check_Q1(f, mist)
        want = oracles.ball_union_count(mist.points, res.radius, n)
        assert res.count == want
        assert res.radius == ring_radius(10, 3, n)
        assert res.threshold == 2 ** n * math.exp(-2 * n / 9)
        assert res.ok == (res.count <= res.threshold)


def test_check_Q1_radius_swallows_cube():
    # at k=3 and n=10 the ball radius is 36 >= n, so one point covers all
    f = sample_uniform(10, 3, 20, seed=1)
    t_list = enumerate_T(f)
    mist = build_mist(t_list, 10, 3)
    if mist.size == 0:
        pytest.skip("degenerate draw: empty mist")
    res = check_Q1(f, mist)
    assert res.count == 1024


def test_check_Q2_exact_vs_naive():
    for seed in range(5):
        n = 8 + seed % 3
        f = sample_uniform(n, 3, 2 * n + 1, seed=seed)
        t_list = enumerate_T(f)
        mist = build_mist(t_list, n, 3)
        res = check_Q2(f, mist, n_limit=14)
        assert res.mode == "exact"
        assert res.threshold == 3
        want = oracles.max_ball_overlap(mist.points, ring_radius(10, 3, n), n)
        assert res.max_overlap == want
        assert res.ok == (want <= 3)


def test_check_Q2_sampled_is_lower_bound():
    n = 12
    f = sample_uniform(n, 3, 25, seed=11)
    t_list = enumerate_T(f)
    mist = build_mist(t_list, n, 3)
    exact = check_Q2(f, mist, n_limit=14)
    sampled = check_Q2(f, mist, n_limit=4, samples=4000, seed=5)
    assert sampled.mode == "sampled"
    assert sampled.max_overlap <= exact.max_overlap


def test_check_Q3_exact_vs_naive():
    for seed in range(4):
        n = 8
        f = sample_uniform(n, 3, 2 * n + seed, seed=seed)
        t_list = enumerate_T(f)
        mist = build_mist(t_list, n, 3)
        res = check_Q3(f, mist, n_limit=20)
        assert res.mode == "exact"
        bad = oracles.q3_violations(f, mist.points,
                                    ring_radius(100, 3, n), t_list)
        assert res.ok == (len(bad) == 0)


def test_check_Q3_sampled_violations_are_real():
    n = 10
    f = sample_uniform(n, 3, 21, seed=13)
    t_list = enumerate_T(f)
    mist = build_mist(t_list, n, 3)
    exact = check_Q3(f, mist, n_limit=20)
    sampled = check_Q3(f, mist, n_limit=4, samples=1500, seed=3)
    assert sampled.mode == "sampled"
    if not sampled.ok:
        assert not exact.ok


def test_clause_space_formulas_vs_enumeration():
    assert clause_space_size(4, 3) == 64
    for n in range(1, 5):
        for k in range(1, 4):
            assert clause_space_size(n, k) == oracles.variable_tuple_count(n, k, ())
            for d in range(n + 1):
                excluded = list(range(d))
                assert clause_space_intersection(n, k, d) == \
                    oracles.variable_tuple_count(n, k, excluded)
    with pytest.raises(ValueError):
        clause_space_intersection(4, 2, 5)
