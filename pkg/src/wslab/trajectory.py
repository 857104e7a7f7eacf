"""Recorded walk trajectories and the quantities read off them.

A trajectory holds the start assignment plus, per recorded step, the flipped
variable, the unsatisfied-clause count after the flip, and the Hamming
distance to each registered reference assignment.  With stride 1 the full
assignment stream is reconstructible by replaying flips, which is what the
event detector and drift series do; down-sampled recordings keep only every
stride-th state (plus the final one) and are rejected by both detectors,
since they cannot certify a condition that must hold at every step.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np


@dataclass
class Trajectory:
    n: int
    initial: np.ndarray          # uint8[n], the start assignment
    refs: list                   # reference assignments, uint8[n] each
    step_index: np.ndarray       # int64[rows], step number of each row
    flipped: np.ndarray          # int32[rows], variable flipped at that step, -1 for row 0
    unsat_counts: np.ndarray     # int64[rows]
    ref_dists: np.ndarray        # int32[rows, len(refs)]
    stride: int = 1

    @property
    def rows(self) -> int:
        return len(self.step_index)

    @property
    def steps(self) -> int:
        """Number of flips the run performed."""
        return int(self.step_index[-1]) if self.rows else 0

    def ref_index(self, mu: np.ndarray) -> int:
        mu = np.asarray(mu, dtype=np.uint8)
        for i, r in enumerate(self.refs):
            if np.array_equal(r, mu):
                return i
        raise ValueError("mu was not a registered reference of this trajectory")

    def distances_to(self, mu: np.ndarray) -> np.ndarray:
        return self.ref_dists[:, self.ref_index(mu)]

    def assignments(self):
        """Yield (step, assignment) for every recorded row; stride 1 only.

        The yielded array is a reused buffer, valid until the next iteration.
        """
        if self.stride != 1:
            raise ValueError("assignment replay needs a stride-1 trajectory")
        sigma = self.initial.copy()
        for row in range(self.rows):
            v = int(self.flipped[row])
            if v >= 0:
                sigma[v] ^= 1
            yield int(self.step_index[row]), sigma

    def to_csv(self) -> str:
        """Delimited export: step, flipped_var (1-based, 0 = none), unsat_count,
        then one dist_ref_i column per reference."""
        out = io.StringIO()
        headers = ["step", "flipped_var", "unsat_count"]
        headers += [f"dist_ref_{i}" for i in range(len(self.refs))]
        out.write(",".join(headers) + "\n")
        for row in range(self.rows):
            v = int(self.flipped[row])
            cells = [str(int(self.step_index[row])), str(v + 1 if v >= 0 else 0),
                     str(int(self.unsat_counts[row]))]
            cells += [str(int(d)) for d in self.ref_dists[row]]
            out.write(",".join(cells) + "\n")
        return out.getvalue()


class TrajectoryRecorder:
    """Builds a Trajectory row by row with geometric buffer growth."""

    def __init__(self, n: int, initial: np.ndarray, refs, stride: int = 1):
        self.n = n
        self.initial = initial.copy()
        self.refs = [r.copy() for r in refs]
        self.stride = stride
        cap = 1024
        self._step = np.empty(cap, dtype=np.int64)
        self._flip = np.empty(cap, dtype=np.int32)
        self._unsat = np.empty(cap, dtype=np.int64)
        self._dist = np.empty((cap, len(refs)), dtype=np.int32)
        self._rows = 0
        self._pending = None

    def _grow(self):
        cap = 2 * len(self._step)
        self._step = np.resize(self._step, cap)
        self._flip = np.resize(self._flip, cap)
        self._unsat = np.resize(self._unsat, cap)
        self._dist = np.resize(self._dist, (cap, self._dist.shape[1]))

    def _store(self, step, flipped, unsat, dists):
        if self._rows == len(self._step):
            self._grow()
        r = self._rows
        self._step[r] = step
        self._flip[r] = flipped
        self._unsat[r] = unsat
        self._dist[r] = dists
        self._rows = r + 1

    def append(self, step: int, flipped: int, unsat: int, dists):
        if step % self.stride == 0:
            self._store(step, flipped, unsat, list(dists))
            self._pending = None
        else:
            self._pending = (step, flipped, unsat, list(dists))

    def finish(self) -> Trajectory:
        if self._pending is not None:
            self._store(*self._pending)
            self._pending = None
        r = self._rows
        return Trajectory(
            n=self.n, initial=self.initial, refs=self.refs,
            step_index=self._step[:r].copy(), flipped=self._flip[:r].copy(),
            unsat_counts=self._unsat[:r].copy(), ref_dists=self._dist[:r].copy(),
            stride=self.stride)


def _replayed_flags(traj: Trajectory, need_oracle, t_member):
    """not-in-excluded-region evaluation helper: yields per-row oracle results.

    need_oracle[row] says whether t_member must be consulted for that row;
    rows where it is False come back as False without replaying the oracle.
    """
    flags = np.zeros(traj.rows, dtype=bool)
    sigma = traj.initial.copy()
    for row in range(traj.rows):
        v = int(traj.flipped[row])
        if v >= 0:
            sigma[v] ^= 1
        if need_oracle[row]:
            flags[row] = bool(t_member(sigma))
    return flags


def ring_bounds(r_lo: float, r_hi: float, k: int, n: int) -> tuple[int, int]:
    kappa = math.log(k) / k
    return math.floor(r_lo * kappa * n), math.floor(r_hi * kappa * n)


def detect_H_events(traj: Trajectory, mu: np.ndarray, t_member, k: int):
    """All step pairs (t1, t2) where the walk sat at distance floor(10*kappa*n)
    from mu at t1, at floor(5*kappa*n) at t2, and every state from t1 to t2
    inclusive stayed inside the 5..10 ring while avoiding the low-violation
    set (t_member is its membership oracle).

    Requires a stride-1 trajectory with mu registered as a reference.
    """
    if traj.stride != 1:
        raise ValueError("event detection needs a stride-1 trajectory")
    d = traj.ref_dists[:, traj.ref_index(mu)]
    lo, hi = ring_bounds(5, 10, k, traj.n)
    in_ring = (d >= lo) & (d <= hi)
    member = _replayed_flags(traj, in_ring, t_member)
    valid = in_ring & ~member

    events = []
    rows = traj.rows
    t = 0
    while t < rows:
        if not valid[t]:
            t += 1
            continue
        end = t
        while end + 1 < rows and valid[end + 1]:
            end += 1
        starts = [s for s in range(t, end + 1) if d[s] == hi]
        stops = [s for s in range(t, end + 1) if d[s] == lo]
        for a in starts:
            for b in stops:
                if a < b:
                    events.append((a, b))
        t = end + 1
    return events


def drift_series(traj: Trajectory, mu: np.ndarray, t_member, k: int,
                 ring=(5, 10)) -> np.ndarray:
    """Per-step drift increments relative to mu.

    Step t+1 contributes dist(t+1) - dist(t) plus a penalty of 2 whenever the
    state at time t was outside the ring or inside the low-violation set, so
    the values land in {-1, +1, +3}.  Requires stride 1 and mu registered.
    """
    if traj.stride != 1:
        raise ValueError("drift series needs a stride-1 trajectory")
    d = traj.ref_dists[:, traj.ref_index(mu)].astype(np.int64)
    lo, hi = ring_bounds(ring[0], ring[1], k, traj.n)
    in_ring = (d >= lo) & (d <= hi)
    member = _replayed_flags(traj, in_ring, t_member)
    excluded = ~in_ring | member        # state not in (ring minus low-violation set)
    y = (d[1:] - d[:-1]) + 2 * excluded[:-1].astype(np.int64)
    return y.astype(np.int8)
