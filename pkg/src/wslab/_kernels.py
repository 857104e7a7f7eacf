"""Compiled inner loops for the walk engine.

The kernels reproduce the SplitMix64 protocol from rng.py bit for bit, so a
run executed here and a run stepped from Python agree on every draw.  All
kernels release the GIL; estimate_success and the sweep harness thread over
them.

State layout shared by the kernels:
    sigma       uint8[n]    current assignment
    true_count  int32[m]    satisfied literal positions per clause
    members     int32[m]    unsatisfied clause indices, first `size` entries live
    pos         int32[m]    position of clause c in members, -1 when satisfied
Occurrence lists are CSR over literal codes 2*v + negated.
"""

import numpy as np
from numba import njit

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_R30 = np.uint64(30)
_R27 = np.uint64(27)
_R31 = np.uint64(31)
_R32 = np.uint64(32)
_ONE = np.uint64(1)


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _R30)) * _MUL1
    z = (z ^ (z >> _R27)) * _MUL2
    return z ^ (z >> _R31)


@njit(cache=True, nogil=True, inline="always")
def _randbelow(word, bound):
    return int((word >> _R32) * np.uint64(bound) >> _R32)


@njit(cache=True, nogil=True)
def init_assignment(seed, sigma):
    """Fill sigma with the n-bit start protocol; returns the rng state."""
    state = np.uint64(seed)
    for i in range(sigma.shape[0]):
        state = state + GAMMA
        sigma[i] = np.uint8(_mix64(state) & _ONE)
    return state


@njit(cache=True, nogil=True)
def build_state(var, neg, sigma, true_count, members, pos):
    """Definitional construction of counts and unsat set; returns set size."""
    m, k = var.shape
    for c in range(m):
        t = 0
        for j in range(k):
            if sigma[var[c, j]] != neg[c, j]:
                t += 1
        true_count[c] = t
    size = 0
    for c in range(m):
        if true_count[c] == 0:
            members[size] = c
            pos[c] = size
            size += 1
        else:
            pos[c] = -1
    return size


@njit(cache=True, nogil=True)
def step(var, neg, occ_start, occ_clause, sigma, true_count, members, pos,
         size, state):
    """One walk step: uniform unsatisfied clause slot, uniform position, flip.

    Returns (flipped_var, chosen_clause, new_size, new_state).  Caller must
    ensure size > 0.
    """
    k = var.shape[1]
    state = state + GAMMA
    c = members[_randbelow(_mix64(state), size)]
    state = state + GAMMA
    j = _randbelow(_mix64(state), k)
    v = var[c, j]
    b = sigma[v]
    sigma[v] = 1 - b
    # occurrences of the literal that just turned false
    lit = 2 * v + (1 - b)
    for t in range(occ_start[lit], occ_start[lit + 1]):
        c2 = occ_clause[t]
        true_count[c2] -= 1
        if true_count[c2] == 0:
            members[size] = c2
            pos[c2] = size
            size += 1
    # occurrences of the literal that just turned true
    lit = 2 * v + b
    for t in range(occ_start[lit], occ_start[lit + 1]):
        c2 = occ_clause[t]
        if true_count[c2] == 0:
            p = pos[c2]
            last = members[size - 1]
            members[p] = last
            pos[last] = p
            size -= 1
            pos[c2] = -1
        true_count[c2] += 1
    return v, c, size, state


@njit(cache=True, nogil=True)
def run(var, neg, occ_start, occ_clause, omega, seed, sigma, true_count,
        members, pos):
    """Full run: random start, then up to omega flips, stopping at the first
    satisfying state.  Returns (found, flips_used, final_unsat_count)."""
    state = init_assignment(seed, sigma)
    size = build_state(var, neg, sigma, true_count, members, pos)
    if size == 0:
        return True, 0, 0
    flips = 0
    while flips < omega:
        _, _, size, state = step(var, neg, occ_start, occ_clause, sigma,
                                 true_count, members, pos, size, state)
        flips += 1
        if size == 0:
            return True, flips, 0
    return False, flips, size
