"""Fixed-width k-CNF formulas, random-formula samplers, and I/O.

Conventions used throughout the package:

* variables are 0-based ints internally; DIMACS text and JSON use 1-based
  signed literals, and the conversion lives only in this module's I/O code
* an assignment is a numpy uint8 vector of 0/1 values, entry i giving the
  value of variable i
* a formula stores its clauses as two (m, k) arrays, one of variable
  indices and one of negation flags; clause and literal order is preserved
  exactly as sampled or parsed, duplicates included
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .rng import MASK64, SplitMix64, bounded, stream_words


class Literal(NamedTuple):
    var: int        # 0-based variable index
    negated: bool

    def signed(self) -> int:
        """1-based DIMACS form, negative when negated."""
        return -(self.var + 1) if self.negated else self.var + 1


Clause = tuple  # tuple of Literal


class DimacsError(ValueError):
    """Raised on malformed DIMACS input."""


@dataclass(frozen=True, eq=False)
class Formula:
    """A k-CNF formula over n variables with m ordered clauses."""

    n: int
    k: int
    var: np.ndarray   # (m, k) int32, values in [0, n)
    neg: np.ndarray   # (m, k) uint8, 1 = negated

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("need n >= 1 and k >= 1")
        var = np.ascontiguousarray(self.var, dtype=np.int32).reshape(-1, self.k)
        neg = np.ascontiguousarray(self.neg, dtype=np.uint8).reshape(-1, self.k)
        if var.shape != neg.shape:
            raise ValueError("var and neg arrays differ in shape")
        if var.size and (var.min() < 0 or var.max() >= self.n):
            raise ValueError("variable index out of range")
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "neg", neg)

    @property
    def m(self) -> int:
        return self.var.shape[0]

    def clause(self, i: int) -> Clause:
        return tuple(
            Literal(int(v), bool(s)) for v, s in zip(self.var[i], self.neg[i])
        )

    def clauses(self) -> Iterator[Clause]:
        for i in range(self.m):
            yield self.clause(i)

    @classmethod
    def from_clauses(cls, n: int, clauses: Sequence[Sequence[int]], k: int | None = None) -> "Formula":
        """Build from clauses given as sequences of 1-based signed literals."""
        if k is None:
            if not clauses:
                raise ValueError("k must be given for an empty clause list")
            k = len(clauses[0])
        m = len(clauses)
        var = np.empty((m, k), dtype=np.int32)
        neg = np.empty((m, k), dtype=np.uint8)
        for i, cl in enumerate(clauses):
            if len(cl) != k:
                raise ValueError(f"clause {i} has width {len(cl)}, expected {k}")
            for j, lit in enumerate(cl):
                if lit == 0 or abs(lit) > n:
                    raise ValueError(f"literal {lit} out of range for n={n}")
                var[i, j] = abs(lit) - 1
                neg[i, j] = 1 if lit < 0 else 0
        return cls(n=n, k=k, var=var, neg=neg)


def formulas_equal(a: Formula, b: Formula) -> bool:
    return (
        a.n == b.n
        and a.k == b.k
        and np.array_equal(a.var, b.var)
        and np.array_equal(a.neg, b.neg)
    )


# ---------------------------------------------------------------------------
# samplers

def sample_uniform(n: int, k: int, m: int, seed: int) -> Formula:
    """Uniform random formula: each of the k*m literal slots is an
    independent uniform draw over the 2n literals.

    Slot (i, j) consumes stream word i*k + j of the seed's stream; word w
    maps to literal w mod 2n with variable w >> 1 and negation w & 1.
    Repeated variables inside a clause and repeated clauses are kept.
    """
    if n < 1 or k < 1 or m < 0:
        raise ValueError("need n >= 1, k >= 1, m >= 0")
    if 2 * n >= (1 << 32):
        raise ValueError("n too large for the bounded-draw protocol")
    lits = bounded(stream_words(seed, 0, m * k), 2 * n).reshape(m, k)
    return Formula(n=n, k=k, var=(lits >> np.uint64(1)).astype(np.int32),
                   neg=(lits & np.uint64(1)).astype(np.uint8))


def _binomial_draw(big_n: int, q: Fraction, u: float) -> int:
    """Inverse-CDF draw from Bin(big_n, q) at uniform u, in log space."""
    if q == 1:
        return big_n
    if q == 0:
        return 0
    qf = float(q)
    mean = big_n * qf
    span = int(mean + 12.0 * math.sqrt(mean + 1.0) + 20.0)
    hi = min(big_n, span)
    j = np.arange(1, hi + 1, dtype=np.float64)
    log_ratio = np.log((big_n - j + 1.0) / j) + math.log(qf) - math.log1p(-qf)
    logpmf = np.empty(hi + 1)
    logpmf[0] = big_n * math.log1p(-qf)
    logpmf[1:] = logpmf[0] + np.cumsum(log_ratio)
    shift = logpmf.max()
    weights = np.exp(logpmf - shift)
    cdf = np.cumsum(weights)
    # the window holds all mass but ~e^-70; renormalize over it
    target = u * cdf[-1]
    return int(np.searchsorted(cdf, target, side="right"))


def sample_binomial(n: int, k: int, m_target: int, seed: int) -> Formula:
    """Binomial random formula: every ordered k-tuple of literals is included
    independently with probability m_target / (2n)^k, in a random order.

    Drawn as m' ~ Bin((2n)^k, q) followed by m' distinct ordered tuples chosen
    uniformly, so the clause list never repeats an ordered tuple.  The tuple
    space is never enumerated; tuples are drawn by rejection on their integer
    codes (base-2n digits, most significant digit = position 0).
    """
    if n < 1 or k < 1 or m_target < 0:
        raise ValueError("need n >= 1, k >= 1, m_target >= 0")
    big_n = (2 * n) ** k
    if m_target > big_n:
        raise ValueError("m_target exceeds the number of ordered k-tuples")
    if big_n >= (1 << 62):
        raise ValueError("clause space too large for exact sampling (needs (2n)^k < 2**62)")
    stream = SplitMix64(seed)
    u = stream.next64() / 2.0 ** 64
    m_prime = _binomial_draw(big_n, Fraction(m_target, big_n), u)

    if m_prime > big_n // 2:
        # dense case: Fisher-Yates over the whole space, take a prefix
        ids_all = list(range(big_n))
        for i in range(big_n - 1):
            j = i + stream.randbelow_big(big_n - i)
            ids_all[i], ids_all[j] = ids_all[j], ids_all[i]
        ids = ids_all[:m_prime]
    else:
        seen = set()
        ids = []
        while len(ids) < m_prime:
            t = stream.randbelow_big(big_n)
            if t not in seen:
                seen.add(t)
                ids.append(t)

    var = np.empty((m_prime, k), dtype=np.int32)
    neg = np.empty((m_prime, k), dtype=np.uint8)
    base = 2 * n
    for i, code in enumerate(ids):
        for j in range(k - 1, -1, -1):
            digit = code % base
            code //= base
            var[i, j] = digit >> 1
            neg[i, j] = digit & 1
    return Formula(n=n, k=k, var=var, neg=neg)


# ---------------------------------------------------------------------------
# assignments

def random_assignment(n: int, stream: SplitMix64) -> np.ndarray:
    """n assignment bits, one stream word each (word & 1)."""
    sigma = np.empty(n, dtype=np.uint8)
    for i in range(n):
        sigma[i] = stream.next64() & 1
    return sigma


def pack_assignment(sigma: np.ndarray) -> int:
    """Assignment to integer with variable 0 as the most significant bit,
    so numeric order on codes equals lexicographic order on value tuples."""
    code = 0
    for b in sigma:
        code = (code << 1) | int(b)
    return code


def unpack_assignment(code: int, n: int) -> np.ndarray:
    sigma = np.empty(n, dtype=np.uint8)
    for i in range(n - 1, -1, -1):
        sigma[i] = code & 1
        code >>= 1
    return sigma


def assignment_to_hex(sigma: np.ndarray) -> str:
    width = max(1, (len(sigma) + 3) // 4)
    return format(pack_assignment(sigma), f"0{width}x")


def assignment_from_hex(text: str, n: int) -> np.ndarray:
    return unpack_assignment(int(text, 16), n)


# ---------------------------------------------------------------------------
# evaluation

def clause_true_counts(formula: Formula, sigma: np.ndarray) -> np.ndarray:
    """Number of satisfied literal positions per clause, as int32."""
    sat = sigma[formula.var] != formula.neg
    return sat.sum(axis=1, dtype=np.int32)


def unsat_set(formula: Formula, sigma: np.ndarray) -> np.ndarray:
    """Indices of clauses not satisfied by sigma (sorted array; duplicates in
    the clause list count separately because indices name slots, not shapes)."""
    if len(sigma) != formula.n:
        raise ValueError("assignment length differs from n")
    return np.nonzero(clause_true_counts(formula, sigma) == 0)[0]


def unsat_count(formula: Formula, sigma: np.ndarray) -> int:
    if len(sigma) != formula.n:
        raise ValueError("assignment length differs from n")
    return int((clause_true_counts(formula, sigma) == 0).sum())


def is_satisfying(formula: Formula, sigma: np.ndarray) -> bool:
    return unsat_count(formula, sigma) == 0


# ---------------------------------------------------------------------------
# DIMACS

def parse_dimacs(text: str, k: int | None = None) -> Formula:
    """Parse DIMACS CNF text into a fixed-width formula.

    Every clause must have exactly k literals; k is inferred from the first
    clause when not supplied.  Comment lines are allowed, clause counts and
    variable ranges are enforced against the header.
    """
    n = None
    m = None
    tokens: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("p"):
            if n is not None:
                raise DimacsError(f"line {lineno}: duplicate problem line")
            parts = stripped.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed problem line {stripped!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: non-integer header counts") from None
            if n < 1 or m < 0:
                raise DimacsError(f"line {lineno}: bad header counts n={n} m={m}")
            continue
        if n is None:
            raise DimacsError(f"line {lineno}: clause data before problem line")
        try:
            tokens.extend(int(t) for t in stripped.split())
        except ValueError:
            raise DimacsError(f"line {lineno}: non-integer token") from None
    if n is None:
        raise DimacsError("missing problem line")

    clauses: list[list[int]] = []
    current: list[int] = []
    for t in tokens:
        if t == 0:
            clauses.append(current)
            current = []
        else:
            if abs(t) > n:
                raise DimacsError(f"literal {t} out of range for n={n}")
            current.append(t)
    if current:
        raise DimacsError("last clause not terminated by 0")
    if len(clauses) != m:
        raise DimacsError(f"header declares {m} clauses, found {len(clauses)}")

    if k is None:
        if not clauses:
            raise DimacsError("cannot infer k from an empty formula")
        k = len(clauses[0])
    for i, cl in enumerate(clauses):
        if len(cl) != k:
            raise DimacsError(f"clause {i + 1} has width {len(cl)}, expected {k}")
    return Formula.from_clauses(n, clauses, k=k)


def write_dimacs(formula: Formula) -> str:
    """Canonical DIMACS text: header then one clause per line, orders preserved.
    parse_dimacs(write_dimacs(f)) reproduces f exactly."""
    lines = [f"p cnf {formula.n} {formula.m}"]
    signed = np.where(formula.neg.astype(np.int64) == 1, -(formula.var.astype(np.int64) + 1),
                      formula.var.astype(np.int64) + 1)
    for i in range(formula.m):
        lines.append(" ".join(str(x) for x in signed[i]) + " 0")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON envelope

def formula_to_json(formula: Formula, model: str | None = None, seed: int | None = None) -> dict:
    """JSON-ready dict with 1-based signed literals, mirroring the DIMACS view."""
    return {
        "n": formula.n,
        "k": formula.k,
        "m": formula.m,
        "seed": seed,
        "model": model,
        "clauses": [[lit.signed() for lit in cl] for cl in formula.clauses()],
    }


def formula_from_json(obj: dict) -> Formula:
    formula = Formula.from_clauses(obj["n"], obj["clauses"], k=obj["k"])
    if formula.m != obj["m"]:
        raise ValueError("clause count disagrees with the m field")
    return formula


def dump_formula_json(formula: Formula, model: str | None = None, seed: int | None = None) -> str:
    return json.dumps(formula_to_json(formula, model=model, seed=seed))


def load_formula_json(text: str) -> Formula:
    return formula_from_json(json.loads(text))
