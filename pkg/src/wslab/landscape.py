"""Structure of the assignment landscape around a formula.

Everything here is exact at desk scale.  Assignments are packed into integer
codes (variable 0 = most significant bit, so numeric order equals
lexicographic order) and the cube is scanned in vectorized chunks; the two
rational thresholds that matter, m / (10 * 2^k) for the low-violation set and
k * U / 10 for the occupation check, are compared in integer arithmetic so no
verdict ever hinges on floating point.

Radii are multiples of kappa * n with kappa = ln(k) / k, floored to integers
exactly as the ring definition D(r1, r2) floors them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cnf import (Formula, assignment_to_hex, pack_assignment,
                  unpack_assignment)
from .rng import SplitMix64, stream_words

_CHUNK = 1 << 18


def kappa(k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    return math.log(k) / k


def ring_radius(r: float, k: int, n: int) -> int:
    """floor(r * kappa * n), the integer radius used by every ring."""
    return math.floor(r * kappa(k) * n)


def dist(sigma: np.ndarray, tau: np.ndarray) -> int:
    """Hamming distance."""
    if len(sigma) != len(tau):
        raise ValueError("assignments differ in length")
    return int((np.asarray(sigma) != np.asarray(tau)).sum())


def delta(sigma: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Indices of variables on which the two assignments disagree, sorted."""
    if len(sigma) != len(tau):
        raise ValueError("assignments differ in length")
    return np.nonzero(np.asarray(sigma) != np.asarray(tau))[0]


@dataclass(frozen=True)
class Ring:
    """D_center(r1, r2): assignments whose distance from center lies in
    [floor(r1*kappa*n), floor(r2*kappa*n)]."""

    center: np.ndarray
    r1: float
    r2: float
    k: int

    @property
    def lo(self) -> int:
        return ring_radius(self.r1, self.k, len(self.center))

    @property
    def hi(self) -> int:
        return ring_radius(self.r2, self.k, len(self.center))

    def contains(self, tau: np.ndarray) -> bool:
        return self.lo <= dist(self.center, tau) <= self.hi


@dataclass(frozen=True)
class TThreshold:
    """Cutoff for the low-violation set: assignments with at most
    m / (10 * 2^k) unsatisfied clauses, held as an exact rational."""

    n: int
    k: int
    m: int

    @property
    def rho(self) -> Fraction:
        return Fraction(self.m, self.n * 2 ** self.k)

    @property
    def cutoff(self) -> Fraction:
        return Fraction(self.m, 10 * 2 ** self.k)

    def admits(self, unsat: int) -> bool:
        return unsat * 10 * 2 ** self.k <= self.m

    @classmethod
    def of(cls, formula: Formula) -> "TThreshold":
        return cls(n=formula.n, k=formula.k, m=formula.m)


def in_T(formula: Formula, tau: np.ndarray) -> bool:
    """Exact membership in the low-violation set."""
    from .cnf import unsat_count
    return TThreshold.of(formula).admits(unsat_count(formula, tau))


# ---------------------------------------------------------------------------
# packed-cube scanning

def _clause_shifts(formula: Formula) -> np.ndarray:
    # bit of variable v sits at position n-1-v in the packed code
    return (formula.n - 1 - formula.var).astype(np.uint64)


def _scan_unsat(formula: Formula, codes: np.ndarray, shifts: np.ndarray,
                mu_code: int | None = None):
    """Unsatisfied-clause counts for each packed assignment in codes; when
    mu_code is given, also the occupation count X of the differing variables."""
    one = np.uint64(1)
    u = np.zeros(len(codes), dtype=np.int64)
    x = np.zeros(len(codes), dtype=np.int64) if mu_code is not None else None
    diff = codes ^ np.uint64(mu_code) if mu_code is not None else None
    for c in range(formula.m):
        unsat = np.ones(len(codes), dtype=bool)
        for j in range(formula.k):
            bit = (codes >> shifts[c, j]) & one
            unsat &= bit == formula.neg[c, j]
        u += unsat
        if x is not None:
            cnt = np.zeros(len(codes), dtype=np.int64)
            for j in range(formula.k):
                # cast before adding: int64 + uint64 promotes to float64
                cnt += ((diff >> shifts[c, j]) & one).astype(np.int64)
            x += unsat * cnt
    return (u, x) if mu_code is not None else u


def _code_chunks(n: int):
    total = 1 << n
    for lo in range(0, total, _CHUNK):
        hi = min(lo + _CHUNK, total)
        yield np.arange(lo, hi, dtype=np.uint64)


def enumerate_T(formula: Formula, n_limit: int = 24) -> list:
    """All members of the low-violation set, in lexicographic order, by
    scanning the full cube (cost 2^n * m * k bit operations)."""
    n = formula.n
    if n > n_limit:
        raise ValueError(f"enumeration over 2^{n} assignments exceeds n_limit={n_limit}")
    thr = TThreshold.of(formula)
    rhs = thr.m
    lhs_scale = 10 * 2 ** formula.k
    shifts = _clause_shifts(formula)
    found = []
    for codes in _code_chunks(n):
        u = _scan_unsat(formula, codes, shifts)
        keep = codes[u * lhs_scale <= rhs]
        found.extend(int(c) for c in keep)
    return [unpack_assignment(c, n) for c in found]


def X(formula: Formula, w, sigma: np.ndarray) -> int:
    """Occupation count: over unsatisfied clauses, how many literal slots hold
    a variable from w (multiplicities included).  w is an iterable of variable
    indices or a boolean mask of length n."""
    w = np.asarray(w)
    if w.dtype == bool:
        if len(w) != formula.n:
            raise ValueError("mask length differs from n")
        mask = w
    else:
        mask = np.zeros(formula.n, dtype=bool)
        if w.size:
            if w.min() < 0 or w.max() >= formula.n:
                raise ValueError("variable index out of range")
            mask[w] = True
    sat = sigma[formula.var] != formula.neg
    unsat_rows = ~sat.any(axis=1)
    return int(mask[formula.var[unsat_rows]].sum())


# ---------------------------------------------------------------------------
# mists

@dataclass
class Mist:
    """A maximal well-separated subset of the low-violation set: points are
    pairwise more than floor(2*kappa*n) apart and every set member lies within
    that radius of some point.  provenance[i] is the index into the input list
    from which point i was taken, in construction order."""

    n: int
    k: int
    points: list
    provenance: list

    @property
    def size(self) -> int:
        return len(self.points)

    def codes(self) -> list:
        return [pack_assignment(p) for p in self.points]


def build_mist(t_list, n: int, k: int) -> Mist:
    """Greedy construction: repeatedly take the lexicographically smallest
    uncovered member and remove everything within floor(2*kappa*n) of it.
    The tie-break makes the construction deterministic."""
    radius = ring_radius(2, k, n)
    coded = sorted((pack_assignment(t), i) for i, t in enumerate(t_list))
    points = []
    provenance = []
    remaining = coded
    while remaining:
        mu_code, mu_idx = remaining[0]
        points.append(unpack_assignment(mu_code, n))
        provenance.append(mu_idx)
        remaining = [(c, i) for c, i in remaining if (c ^ mu_code).bit_count() > radius]
    return Mist(n=n, k=k, points=points, provenance=provenance)


@dataclass
class MistCheck:
    separated: bool            # pairwise distance condition
    covering: bool             # every input member near some point
    min_pairwise: int | None
    max_cover_dist: int | None
    radius: int
    strict: bool

    @property
    def ok(self) -> bool:
        return self.separated and self.covering


def verify_mist(mist: Mist, t_list, n: int, k: int, strict: bool = False) -> MistCheck:
    """Check both mist axioms against the set they were built from.

    Default separation reading: pairwise distance > floor(2*kappa*n), the
    threshold the construction removes by.  strict=True demands distance
    >= 2*kappa*n as a real number instead.
    """
    radius = ring_radius(2, k, n)
    threshold = 2 * kappa(k) * n
    codes = mist.codes()
    min_pair = None
    for a, b in itertools.combinations(codes, 2):
        d = (a ^ b).bit_count()
        if min_pair is None or d < min_pair:
            min_pair = d
    if min_pair is None:
        separated = True
    elif strict:
        separated = min_pair >= threshold
    else:
        separated = min_pair > radius

    max_cover = None
    for t in t_list:
        tc = pack_assignment(t)
        best = min(((tc ^ c).bit_count() for c in codes), default=None)
        if best is None:
            # nonempty input but no points: covering fails vacuously
            return MistCheck(separated=separated, covering=False, min_pairwise=min_pair,
                             max_cover_dist=None, radius=radius, strict=strict)
        if max_cover is None or best > max_cover:
            max_cover = best
    covering = max_cover is None or max_cover <= radius
    return MistCheck(separated=separated, covering=covering, min_pairwise=min_pair,
                     max_cover_dist=max_cover, radius=radius, strict=strict)


# ---------------------------------------------------------------------------
# quasirandomness

@dataclass
class Q1Result:
    count: int
    threshold: float
    ok: bool
    radius: int


@dataclass
class Q2Result:
    max_overlap: int
    threshold: int
    ok: bool
    mode: str
    worst_tau_hex: str | None


@dataclass
class Q3Result:
    worst_ratio: float | None
    ok: bool
    mode: str
    checked: int
    witness_mu_hex: str | None
    witness_sigma_hex: str | None


def check_Q1(formula: Formula, mist: Mist, n_limit: int = 24) -> Q1Result:
    """Exact size of the union of radius-floor(10*kappa*n) balls around the
    mist points, compared against 2^n * exp(-2n/k^2)."""
    n, k = formula.n, formula.k
    if n > n_limit:
        raise ValueError(f"enumeration over 2^{n} assignments exceeds n_limit={n_limit}")
    radius = ring_radius(10, k, n)
    threshold = 2.0 ** n * math.exp(-2.0 * n / k ** 2)
    mu_codes = [np.uint64(c) for c in mist.codes()]
    count = 0
    for codes in _code_chunks(n):
        near = np.zeros(len(codes), dtype=bool)
        for mc in mu_codes:
            near |= np.bitwise_count(codes ^ mc) <= radius
        count += int(near.sum())
    return Q1Result(count=count, threshold=threshold, ok=count <= threshold,
                    radius=radius)


def check_Q2(formula: Formula, mist: Mist, n_limit: int = 14,
             samples: int = 100_000, seed: int = 0) -> Q2Result:
    """Largest number of mist points inside one radius-floor(10*kappa*n) ball,
    over all centers: exact scan for n <= n_limit, sampled centers otherwise.
    Verdict: the maximum should not exceed k."""
    n, k = formula.n, formula.k
    radius = ring_radius(10, k, n)
    if not mist.points:
        return Q2Result(max_overlap=0, threshold=k, ok=True, mode="exact",
                        worst_tau_hex=None)
    if n <= n_limit:
        mu_codes = [np.uint64(c) for c in mist.codes()]
        best = -1
        best_code = 0
        for codes in _code_chunks(n):
            overlap = np.zeros(len(codes), dtype=np.int64)
            for mc in mu_codes:
                overlap += np.bitwise_count(codes ^ mc) <= radius
            i = int(overlap.argmax())
            if overlap[i] > best:
                best = int(overlap[i])
                best_code = int(codes[i])
        worst = assignment_to_hex(unpack_assignment(best_code, n))
        return Q2Result(max_overlap=best, threshold=k, ok=best <= k, mode="exact",
                        worst_tau_hex=worst)
    # sampled mode: random centers only give a lower bound on the maximum
    words = stream_words(seed, 0, samples * n)
    taus = (words & np.uint64(1)).astype(np.uint8).reshape(samples, n)
    overlap = np.zeros(samples, dtype=np.int64)
    for mu in mist.points:
        overlap += (taus != mu).sum(axis=1) <= radius
    i = int(overlap.argmax())
    best = int(overlap[i])
    return Q2Result(max_overlap=best, threshold=k, ok=best <= k, mode="sampled",
                    worst_tau_hex=assignment_to_hex(taus[i]))


def _q3_codes_for_mu(n: int, mu_code: int, radius: int):
    """Packed codes of the ball around mu: the whole cube when it saturates,
    otherwise distance shells materialized from position combinations."""
    if radius >= n:
        yield from _code_chunks(n)
        return
    positions = list(range(n))
    for d in range(radius + 1):
        shell = []
        for combo in itertools.combinations(positions, d):
            flip = 0
            for p in combo:
                flip |= 1 << (n - 1 - p)
            shell.append(mu_code ^ flip)
            if len(shell) == _CHUNK:
                yield np.array(shell, dtype=np.uint64)
                shell = []
        if shell:
            yield np.array(shell, dtype=np.uint64)


def check_Q3(formula: Formula, mist: Mist, n_limit: int = 20,
             samples: int = 2000, seed: int = 0) -> Q3Result:
    """Occupation check: around every mist point mu, every assignment sigma
    within floor(100*kappa*n) that is outside the low-violation set must have
    at most a 1/10 fraction of its unsatisfied literal slots on variables
    where sigma and mu disagree.  Ratios are compared as integers
    (10 * X <= k * U); the reported worst ratio is X / (k * U) as a float.
    """
    n, k, m = formula.n, formula.k, formula.m
    radius = min(n, ring_radius(100, k, n))
    lhs_scale = 10 * 2 ** k
    if not mist.points:
        return Q3Result(worst_ratio=None, ok=True, mode="exact", checked=0,
                        witness_mu_hex=None, witness_sigma_hex=None)
    exact = n <= n_limit
    worst = None
    worst_mu = None
    worst_sigma = None
    ok = True
    checked = 0
    if exact:
        shifts = _clause_shifts(formula)
        for mu in mist.points:
            mu_code = pack_assignment(mu)
            for codes in _q3_codes_for_mu(n, mu_code, radius):
                u, x = _scan_unsat(formula, codes, shifts, mu_code=mu_code)
                outside = u * lhs_scale > m
                checked += int(outside.sum())
                if not outside.any():
                    continue
                uo = u[outside]
                xo = x[outside]
                assert (uo > 0).all(), "zero unsatisfied count outside the low-violation set"
                if (10 * xo > k * uo).any():
                    ok = False
                ratios = xo / (k * uo)
                i = int(ratios.argmax())
                if worst is None or ratios[i] > worst:
                    worst = float(ratios[i])
                    worst_mu = mu
                    worst_sigma = unpack_assignment(int(codes[outside][i]), n)
    else:
        # shell-stratified sample: uniform distance, then a uniform flip set
        from .cnf import unsat_count
        stream = SplitMix64(seed)
        for mu in mist.points:
            for _ in range(samples):
                d = stream.randbelow(radius + 1) if radius > 0 else 0
                chosen: set = set()
                while len(chosen) < d:
                    p = stream.randbelow(n)
                    chosen.add(p)
                sigma = mu.copy()
                flips = np.fromiter(chosen, dtype=np.int64, count=len(chosen))
                if len(flips):
                    sigma[flips] ^= 1
                u = unsat_count(formula, sigma)
                if u * lhs_scale <= m:
                    continue
                xval = X(formula, flips, sigma)
                checked += 1
                if 10 * xval > k * u:
                    ok = False
                ratio = xval / (k * u)
                if worst is None or ratio > worst:
                    worst = float(ratio)
                    worst_mu = mu
                    worst_sigma = sigma
    return Q3Result(
        worst_ratio=worst, ok=ok, mode="exact" if exact else "sampled",
        checked=checked,
        witness_mu_hex=assignment_to_hex(worst_mu) if worst_mu is not None else None,
        witness_sigma_hex=assignment_to_hex(worst_sigma) if worst_sigma is not None else None)


# ---------------------------------------------------------------------------
# clause space

def clause_space_size(n: int, k: int) -> int:
    """Number of ordered k-clauses unsatisfied by a fixed assignment: every
    position takes any variable with its one falsifying sign, so n^k."""
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    return n ** k


def clause_space_intersection(n: int, k: int, d: int) -> int:
    """Ordered k-clauses unsatisfied by both of two assignments at Hamming
    distance d: only the n-d agreeing variables can appear, so (n-d)^k."""
    if not 0 <= d <= n:
        raise ValueError("need 0 <= d <= n")
    if k < 1:
        raise ValueError("need k >= 1")
    return (n - d) ** k
