"""Exact event-driven time evolution of the hard-ball gas.

Collision times come from the contact quadratic |dq + tau dv - L a|^2 = 4r^2,
always taking the smaller positive root (evaluated in the cancellation-free
form).  The event loop keeps wrapped positions plus exact integer windings so
contact residues stay at machine precision even over very long runs; lifted
coordinates are reconstructed on demand.
"""

from __future__ import annotations

import heapq
import itertools
import math

import numpy as np

from .errors import (
    AccumulationGuard,
    NotInContact,
    RecedingPair,
    SimultaneousCollision,
    TangentialApproach,
    ZeroMass,
)
from .model import (
    CollisionEvent,
    OrbitSegment,
    PhaseState,
    SystemParams,
    torus_separation,
    validate,
)

EPS_TANGENT = 1e-12
EPS_CONTACT = 1e-9
M_MAX_DEFAULT = 1e6  # events per unit time before the accumulation guard trips


def _candidate_images(d0, dv, L, r, t_lo, t_hi):
    """Integer images a whose contact shell is reachable for tau in [t_lo, t_hi]."""
    lo = d0 + t_lo * dv
    hi = d0 + t_hi * dv
    cmin = np.minimum(lo, hi) - 2.0 * r
    cmax = np.maximum(lo, hi) + 2.0 * r
    ranges = [
        range(int(math.floor(a / L)), int(math.ceil(b / L)) + 1)
        for a, b in zip(cmin, cmax)
    ]
    return itertools.product(*ranges)


def _predict(d0, dv, L, r, t_lo, t_hi, eps_tangent=EPS_TANGENT):
    """Earliest contact time in (t_lo, t_hi] for relative data (d0, dv).

    Returns (tau, a, discriminant) or None.  Raises TangentialApproach when a
    would-be event sits inside the tangency guard band.
    """
    A = float(dv @ dv)
    if A == 0.0:
        return None
    best = None
    for a_tup in _candidate_images(d0, dv, L, r, t_lo, t_hi):
        a = np.array(a_tup)
        d = d0 - L * a
        B = 2.0 * float(dv @ d)
        C = float(d @ d) - 4.0 * r * r
        delta = B * B - 4.0 * A * C
        scale = B * B + abs(4.0 * A * C)
        if delta <= 0.0:
            # an exact graze (closest approach at distance 2r) has delta == 0;
            # flag it when the approach happens inside the window
            if abs(delta) < eps_tangent * scale and t_lo < -B / (2.0 * A) <= t_hi:
                raise TangentialApproach(
                    f"discriminant {delta:.3e} within guard of zero at graze"
                )
            continue
        sq = math.sqrt(delta)
        # smaller root, cancellation-free branch
        if B < 0.0:
            tau = 2.0 * C / (-B + sq)
        else:
            tau = (-B - sq) / (2.0 * A)
        if not (t_lo < tau <= t_hi):
            continue
        # approach condition at contact; rejects the receding second root and
        # spurious roots of a pair sitting numerically on the contact sphere
        if 0.5 * B + tau * A >= 0.0:
            continue
        scale = B * B + abs(4.0 * A * C)
        if delta < eps_tangent * scale:
            raise TangentialApproach(
                f"discriminant {delta:.3e} below guard ({eps_tangent:.1e} * {scale:.3e})"
            )
        if best is None or tau < best[0]:
            best = (tau, a, delta)
    return best


def pair_collision_time(state: PhaseState, i: int, j: int, horizon: float, params: SystemParams):
    """Next collision of balls i, j within `horizon`, or None.

    Minimizes the smaller positive root of the contact quadratic over the
    periodic images reachable inside the horizon.
    """
    L, r = params.torus_side, params.radius
    d0 = state.positions[i] - state.positions[j]
    # reduce the lifted difference by an exact integer so the quadratic is
    # evaluated on O(L) quantities
    base = np.floor(d0 / L + 0.5).astype(int)
    dv = state.velocities[i] - state.velocities[j]
    hit = _predict(d0 - L * base, dv, L, r, 0.0, horizon)
    if hit is None:
        return None
    tau, a, delta = hit
    return tau, a + base, delta


def _impulse(velocities, i, j, contact, masses, r):
    """Post-collision velocities for the pair (i, j) with contact vector `contact`.

    Implements the elastic reflection of the relative velocity; the mass
    fractions degenerate continuously to the zero-mass law.
    """
    mi, mj = masses[i], masses[j]
    msum = mi + mj
    if msum <= 0.0:
        raise ZeroMass(f"both masses of pair ({i}, {j}) are zero")
    dv = velocities[i] - velocities[j]
    # evaluate with the normalized normal: an exact orthogonal reflection of
    # the relative velocity, so the tiny contact residue cannot leak into H
    n = contact / np.linalg.norm(contact)
    g = 2.0 * float(dv @ n)
    out = velocities.copy()
    out[i] = velocities[i] - (mj / msum) * g * n
    out[j] = velocities[j] + (mi / msum) * g * n
    return out


def apply_collision(state: PhaseState, pair, a, params: SystemParams) -> PhaseState:
    """Update velocities of a pair at contact; positions and others unchanged."""
    i, j = pair
    L, r = params.torus_side, params.radius
    contact = state.positions[i] - state.positions[j] - L * np.asarray(a)
    residue = float(contact @ contact) - 4.0 * r * r
    if abs(residue) > EPS_CONTACT * max(1.0, 4.0 * r * r):
        raise NotInContact(f"contact residue {residue:.3e}")
    dv = state.velocities[i] - state.velocities[j]
    if float(dv @ contact) >= 0.0:
        raise RecedingPair("pair is separating along the line of centers")
    velocities = _impulse(state.velocities, i, j, contact, params.mass_array, r)
    return PhaseState(state.positions.copy(), velocities, state.time)


def conserved(state: PhaseState, params: SystemParams):
    """Energy H = 1/2 sum m |v|^2 and momentum P = sum m v."""
    m = params.mass_array
    H = 0.5 * float(np.sum(m[:, None] * state.velocities**2))
    P = m @ state.velocities
    return H, P


def reverse(state: PhaseState) -> PhaseState:
    """Velocity reversal; positions and time kept."""
    return PhaseState(state.positions.copy(), -state.velocities, state.time)


class _EventLoop:
    """Priority-queue scheduler over pair predictions with generation counters."""

    def __init__(self, params, state, eps_tangent, m_max, tangential_nudge):
        validate(params)
        self.params = params
        self.L = params.torus_side
        self.r = params.radius
        self.N = params.n_balls
        self.masses = params.mass_array
        self.eps_tangent = eps_tangent
        self.m_max = m_max
        self.tangential_nudge = tangential_nudge

        self.t = state.time
        self.winding = np.floor(state.positions / self.L).astype(np.int64)
        self.pos = state.positions - self.L * self.winding
        self.vel = state.velocities.copy()
        self.gen = [0] * self.N
        self.heap = []
        self.seq = 0
        self._event_times = []  # for the accumulation guard
        for i in range(self.N):
            for j in range(i + 1, self.N):
                self._schedule(i, j, self.t)

    # horizon keeping the per-component image search to a couple of candidates
    def _horizon(self):
        vmax = float(np.max(np.linalg.norm(self.vel, axis=1)))
        if vmax == 0.0:
            return math.inf
        return self.L / (4.0 * vmax)

    def _schedule(self, i, j, t_from):
        h = self._horizon()
        if not math.isfinite(h):
            return
        dv = self.vel[i] - self.vel[j]
        # re-anchor the quadratic at t_from so root precision does not degrade
        # over long free flights spanning many rechecks
        d0 = self.pos[i] - self.pos[j] + (t_from - self.t) * dv
        base = np.floor(d0 / self.L + 0.5).astype(int)
        # slightly negative lower bound: a state sitting exactly on the contact
        # sphere with approaching velocities (e.g. a reversed post-collision
        # state) must fire its collision immediately
        t_lo = -1e-12 * max(1.0, h)
        try:
            hit = _predict(
                d0 - self.L * base, dv, self.L, self.r, t_lo, h, self.eps_tangent
            )
        except TangentialApproach:
            if not self.tangential_nudge:
                raise
            # opt-in escape from the measure-zero grazing set
            self.vel[i] = self.vel[i] * (1.0 + 1e-9)
            self.gen[i] += 1
            for k in range(self.N):
                if k != i:
                    self._schedule(min(i, k), max(i, k), t_from)
            return
        self.seq += 1
        if hit is None:
            heapq.heappush(
                self.heap,
                (t_from + h, self.seq, "recheck", i, j, None, self.gen[i], self.gen[j]),
            )
        else:
            tau, a, _ = hit
            heapq.heappush(
                self.heap,
                (max(t_from + tau, t_from), self.seq, "hit", i, j, a, self.gen[i], self.gen[j]),
            )

    def resynchronize(self, h_ref, p_ref):
        """Renormalize H and P to their reference values; reschedules everything."""
        m = self.masses
        total = float(m.sum())
        com = p_ref / total
        dev = self.vel - com
        dev -= (m @ dev) / total  # momentum of the deviation -> 0
        kin_dev = float(np.sum(m[:, None] * dev**2))
        target = 2.0 * h_ref - total * float(com @ com)
        if kin_dev > 0.0 and target > 0.0:
            dev *= math.sqrt(target / kin_dev)
        self.vel = com + dev
        for i in range(self.N):
            self.gen[i] += 1
        for i in range(self.N):
            for j in range(i + 1, self.N):
                self._schedule(i, j, self.t)

    def _advance_to(self, t_new):
        dt = t_new - self.t
        self.pos += dt * self.vel
        shift = np.floor(self.pos / self.L).astype(np.int64)
        self.pos -= self.L * shift
        self.winding += shift
        self.t = t_new

    def lifted_positions(self):
        return self.pos + self.L * self.winding

    def _check_simultaneous(self, t_event, pair):
        eps = 1e-12 * max(1.0, abs(t_event))
        for entry in self.heap:
            t, _, kind, i, j, _, gi, gj = entry
            if t - t_event > eps:
                continue
            if kind != "hit" or gi != self.gen[i] or gj != self.gen[j]:
                continue
            if (i, j) != pair and abs(t - t_event) <= eps:
                raise SimultaneousCollision(
                    f"events for pairs {pair} and {(i, j)} within {eps:.1e} at t={t_event}"
                )

    def _compact(self):
        live = [
            e for e in self.heap if e[6] == self.gen[e[3]] and e[7] == self.gen[e[4]]
        ]
        heapq.heapify(live)
        self.heap = live

    def next_event(self, t_stop):
        """Pop the next collision at t <= t_stop, or None if the stop comes first."""
        if len(self.heap) > max(32, 4 * self.N * self.N):
            self._compact()
        while self.heap:
            if self.heap[0][0] > t_stop:
                return None
            t, _, kind, i, j, a, gi, gj = heapq.heappop(self.heap)
            if gi != self.gen[i] or gj != self.gen[j]:
                continue
            if kind == "recheck":
                self._schedule(i, j, t)
                continue
            self._check_simultaneous(t, (i, j))
            self._advance_to(t)
            # contact image is the unique minimum image (2r < L/2)
            sep, a_small = torus_separation(self.pos[i], self.pos[j], self.L)
            a_full = a_small + (self.winding[i] - self.winding[j])
            pre = self.vel.copy()
            self.vel = _impulse(self.vel, i, j, sep, self.masses, self.r)
            self.gen[i] += 1
            self.gen[j] += 1
            for k in range(self.N):
                if k != i:
                    self._schedule(min(i, k), max(i, k), self.t)
                if k != j and k != i:
                    self._schedule(min(j, k), max(j, k), self.t)
            self._guard_accumulation(t)
            return CollisionEvent(
                index=0,
                time=t,
                pair=(i, j),
                adjustment=a_full,
                pre_velocities=pre,
                post_velocities=self.vel.copy(),
                impact_normal=sep / np.linalg.norm(sep),
                contact_vector=sep,
            )
        return None

    def _guard_accumulation(self, t):
        self._event_times.append(t)
        n = len(self._event_times)
        window = 1000
        if n >= window:
            dt = t - self._event_times[n - window]
            if dt * self.m_max < window:
                raise AccumulationGuard(
                    f"{window} events in {dt:.3e} time units exceeds {self.m_max:.0e}/unit"
                )
            if n > 2 * window:
                del self._event_times[: n - window]


def simulate(
    params: SystemParams,
    state: PhaseState,
    n_collisions: int | None = None,
    total_time: float | None = None,
    eps_tangent: float = EPS_TANGENT,
    m_max: float = M_MAX_DEFAULT,
    tangential_nudge: bool = False,
    resync_every: int = 0,
) -> OrbitSegment:
    """Event-driven evolution until a collision-count or elapsed-time stop.

    Records every collision with its adjustment vector; free flight follows
    q_i <- q_i + tau v_i between events.  Deterministic for identical inputs.
    resync_every > 0 renormalizes H and P to their initial values every that
    many events (off by default; the engine conserves them to near roundoff
    without it).
    """
    if (n_collisions is None) == (total_time is None):
        raise ValueError("specify exactly one of n_collisions, total_time")
    loop = _EventLoop(params, state, eps_tangent, m_max, tangential_nudge)
    h_ref, p_ref = conserved(state, params)
    t_stop = state.time + total_time if total_time is not None else math.inf
    events = []
    while True:
        if n_collisions is not None and len(events) >= n_collisions:
            break
        ev = loop.next_event(t_stop)
        if ev is None:
            loop._advance_to(t_stop)
            break
        ev.index = len(events) + 1
        events.append(ev)
        if resync_every and len(events) % resync_every == 0:
            loop.resynchronize(h_ref, p_ref)
    final = PhaseState(loop.lifted_positions(), loop.vel.copy(), loop.t)
    return OrbitSegment(params=params, initial=state.copy(), events=events, final=final)
