"""Arbitrary-precision replica of the event-driven dynamics (gmpy2.mpfr).

Round-trip (reverse-and-replay) errors of the double-precision engine are
amplified exponentially by the hyperbolicity of the flow, so recovering the
initial state after ~10^3 collisions to any fixed tolerance needs working
precision that grows linearly with the number of collisions.  This module
re-implements the same algorithm (windowed image search, smaller positive
root, normalized elastic reflection) over mpfr scalars.
"""

from __future__ import annotations

import itertools
import math

import gmpy2
from gmpy2 import mpfr

from .errors import HardBallError

# empirical per-collision precision loss is ~1 decimal digit for desk-scale
# geometries; this adds comfortable slack
BITS_PER_COLLISION = 5.0
BASE_BITS = 256


def precision_for(n_collisions: int) -> int:
    return BASE_BITS + int(BITS_PER_COLLISION * n_collisions)


def _dot(a, b):
    s = a[0] * b[0]
    for x, y in zip(a[1:], b[1:]):
        s += x * y
    return s


class ExactSimulator:
    """Event-driven hard-ball evolution over mpfr scalars (small N only)."""

    def __init__(self, params, positions, velocities, prec_bits):
        self.params = params
        self.prec = prec_bits
        gmpy2.get_context().precision = prec_bits
        self.N = params.n_balls
        self.nu = params.dim
        self.L = mpfr(params.torus_side)
        self.r = mpfr(params.radius)
        self.masses = [mpfr(m) for m in params.masses]
        self.q = [[mpfr(x) for x in row] for row in positions]
        self.v = [[mpfr(x) for x in row] for row in velocities]
        self.t = mpfr(0)
        self.tiny = mpfr(2) ** (-(prec_bits // 2))
        self.pairs = []  # symbolic sequence
        self.adjustments = []

    def _pair_next(self, i, j, horizon_cap):
        """Earliest collision time offset for pair (i, j), or None within the cap."""
        L, r = self.L, self.r
        dv = [self.v[i][c] - self.v[j][c] for c in range(self.nu)]
        a2 = _dot(dv, dv)
        if a2 == 0:
            return None
        speed = math.sqrt(float(a2))
        h = float(L) / (2.0 * speed)
        d0 = [self.q[i][c] - self.q[j][c] for c in range(self.nu)]
        t_lo = mpfr(0)
        while float(t_lo) < horizon_cap:
            base = [
                mpfr(math.floor(float(d0[c] + t_lo * dv[c]) / float(L) + 0.5))
                for c in range(self.nu)
            ]
            best = None
            lo_f, hi_f = float(t_lo), float(t_lo) + h
            for off in itertools.product((-1, 0, 1), repeat=self.nu):
                d = [d0[c] - L * (base[c] + off[c]) for c in range(self.nu)]
                B = 2 * _dot(dv, d)
                C = _dot(d, d) - 4 * r * r
                delta = B * B - 4 * a2 * C
                if delta <= 0:
                    continue
                sq = gmpy2.sqrt(delta)
                if B < 0:
                    tau = 2 * C / (-B + sq)
                else:
                    tau = (-B - sq) / (2 * a2)
                # tiny negative slack: a reversed state sitting exactly on the
                # contact sphere must re-fire its collision immediately
                if tau <= t_lo - self.tiny or float(tau) > hi_f:
                    continue
                if B / 2 + tau * a2 >= 0:
                    continue
                if best is None or tau < best[0]:
                    best = (tau, [int(base[c] + off[c]) for c in range(self.nu)])
            if best is not None:
                return best
            t_lo += mpfr(h)
        return None

    def step(self, horizon_cap=1e6):
        """Advance to the next collision; returns (pair, adjustment)."""
        gmpy2.get_context().precision = self.prec
        best = None
        for i in range(self.N):
            for j in range(i + 1, self.N):
                hit = self._pair_next(i, j, horizon_cap)
                if hit is not None and (best is None or hit[0] < best[0]):
                    best = (hit[0], (i, j), hit[1])
        if best is None:
            raise HardBallError("no collision found within the horizon cap")
        tau, (i, j), a = best
        for k in range(self.N):
            for c in range(self.nu):
                self.q[k][c] += tau * self.v[k][c]
        self.t += tau
        n = [self.q[i][c] - self.q[j][c] - self.L * a[c] for c in range(self.nu)]
        norm = gmpy2.sqrt(_dot(n, n))
        n = [x / norm for x in n]
        dv = [self.v[i][c] - self.v[j][c] for c in range(self.nu)]
        g = 2 * _dot(dv, n)
        mi, mj = self.masses[i], self.masses[j]
        msum = mi + mj
        for c in range(self.nu):
            self.v[i][c] -= (mj / msum) * g * n[c]
            self.v[j][c] += (mi / msum) * g * n[c]
        self.pairs.append((i, j))
        self.adjustments.append(tuple(a))
        return (i, j), tuple(a)

    def run(self, n_collisions):
        for _ in range(n_collisions):
            self.step()

    def run_until(self, t_stop):
        """Advance exactly to time t_stop (collisions included up to it)."""
        gmpy2.get_context().precision = self.prec
        t_stop = mpfr(t_stop)
        while True:
            save = ([row[:] for row in self.q], [row[:] for row in self.v], self.t)
            try:
                self.step()
            except HardBallError:
                break
            if self.t > t_stop:
                # undo and do a plain free flight to t_stop
                self.q, self.v, self.t = save
                self.pairs.pop()
                self.adjustments.pop()
                break
        dt = t_stop - self.t
        for k in range(self.N):
            for c in range(self.nu):
                self.q[k][c] += dt * self.v[k][c]
        self.t = t_stop

    def reverse(self):
        gmpy2.get_context().precision = self.prec
        for k in range(self.N):
            for c in range(self.nu):
                self.v[k][c] = -self.v[k][c]
        self.pairs = []
        self.adjustments = []
        self.t = mpfr(0)

    def positions_float(self):
        return [[float(x) for x in row] for row in self.q]

    def velocities_float(self):
        return [[float(x) for x in row] for row in self.v]


def exact_segment(params, state, n_collisions, prec_bits=None):
    """Orbit segment computed at high precision, rounded to floats.

    The double-precision engine drifts away from the true orbit of its
    initial data after a dozen or so collisions (the scheme itself can
    change), so analyses that differentiate the flow around a recorded
    segment need segments whose symbolic scheme is combinatorially faithful.
    """
    import numpy as np

    from .model import CollisionEvent, OrbitSegment, PhaseState

    if prec_bits is None:
        prec_bits = precision_for(n_collisions) + 64
    sim = ExactSimulator(params, state.positions, state.velocities, prec_bits)
    events = []
    for k in range(1, n_collisions + 1):
        pre = np.array(sim.velocities_float())
        (i, j), a = sim.step()
        arr_a = np.array(a, dtype=int)
        contact = np.array(
            [float(sim.q[i][c] - sim.q[j][c] - sim.L * a[c]) for c in range(sim.nu)]
        )
        events.append(
            CollisionEvent(
                index=k,
                time=float(sim.t),
                pair=(i, j),
                adjustment=arr_a,
                pre_velocities=pre,
                post_velocities=np.array(sim.velocities_float()),
                impact_normal=contact / np.linalg.norm(contact),
                contact_vector=contact,
            )
        )
    final = PhaseState(
        np.array(sim.positions_float()), np.array(sim.velocities_float()), float(sim.t)
    )
    return OrbitSegment(params=params, initial=state.copy(), events=events, final=final)
