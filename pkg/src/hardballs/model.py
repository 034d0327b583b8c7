"""Domain types, parameter validation, sampling, and torus geometry.

Positions live in the Euclidean lift of the torus; the wrapped representative
plus an integer winding is reconstructed where needed by the dynamics layer.
Velocities of states produced by the standard sampler satisfy the
normalization sum(m_i v_i) = 0 and sum(m_i |v_i|^2) = 1 (twice the energy).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BadDimension,
    DegenerateMasses,
    OverlapGeometry,
    PackingTimeout,
    ZeroMass,
)

# Margin (relative to L) kept above contact distance when sampling positions,
# so no trajectory starts on the boundary of the configuration domain.
SAMPLING_MARGIN = 1e-9


@dataclass(frozen=True)
class SystemParams:
    """Outer geometric data: ball count, dimension, torus side, radius, masses."""

    n_balls: int
    dim: int
    torus_side: float
    radius: float
    masses: tuple[float, ...]
    allow_zero_mass: bool = False

    @property
    def mass_array(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float)


def validate(params: SystemParams) -> None:
    """Check the SystemParams invariants, raising a ConfigError subclass on failure."""
    if params.n_balls < 2 or params.dim < 2:
        raise BadDimension(
            f"need N >= 2 and nu >= 2, got N={params.n_balls}, nu={params.dim}"
        )
    if len(params.masses) != params.n_balls:
        raise DegenerateMasses(
            f"expected {params.n_balls} masses, got {len(params.masses)}"
        )
    if params.torus_side <= 0 or params.radius <= 0:
        raise OverlapGeometry("torus_side and radius must be positive")
    # 4r < L guarantees a ball cannot touch its own periodic image, which the
    # minimum-image search of the dynamics layer relies on.
    if 4.0 * params.radius >= params.torus_side:
        raise OverlapGeometry(
            f"4r = {4.0 * params.radius} must be < L = {params.torus_side}"
        )
    if any(m < 0 for m in params.masses):
        raise DegenerateMasses("masses must be nonnegative")
    n_positive = sum(1 for m in params.masses if m > 0)
    if n_positive < 2:
        raise DegenerateMasses("at least two masses must be strictly positive")
    if not params.allow_zero_mass and any(m == 0 for m in params.masses):
        raise DegenerateMasses(
            "zero masses admitted only with allow_zero_mass=True"
        )


@dataclass
class PhaseState:
    """A point of the flow: lifted positions, velocities, current time."""

    positions: np.ndarray  # (N, nu) Euclidean lifts
    velocities: np.ndarray  # (N, nu)
    time: float = 0.0

    def copy(self) -> "PhaseState":
        return PhaseState(self.positions.copy(), self.velocities.copy(), self.time)


@dataclass
class HatState:
    """Mass-rescaled coordinates: q_hat_i = sqrt(m_i) q_i, v_hat_i = sqrt(m_i) v_i."""

    positions: np.ndarray
    velocities: np.ndarray
    time: float = 0.0


@dataclass
class CollisionEvent:
    """One recorded collision of an orbit segment."""

    index: int  # 1-based position in the segment
    time: float
    pair: tuple[int, int]  # 0-based ball indices, i < j
    adjustment: np.ndarray  # integer image vector a_k
    pre_velocities: np.ndarray  # (N, nu) velocities just before the event
    post_velocities: np.ndarray  # (N, nu) velocities just after
    impact_normal: np.ndarray  # unit vector along q_i - q_j - L a_k
    contact_vector: np.ndarray  # q_i - q_j - L a_k itself (norm 2r)


@dataclass
class OrbitSegment:
    """Initial state plus the ordered collision events up to the final state."""

    params: SystemParams
    initial: PhaseState
    events: list[CollisionEvent]
    final: PhaseState

    @property
    def n_events(self) -> int:
        return len(self.events)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [ev.pair for ev in self.events]

    @property
    def times(self) -> np.ndarray:
        return np.array([ev.time for ev in self.events])

    def velocity_history(self) -> np.ndarray:
        """Array of shape (n+1, N, nu): v^k for k = 0..n."""
        if not self.events:
            return self.initial.velocities[None].copy()
        rows = [self.initial.velocities] + [ev.post_velocities for ev in self.events]
        return np.stack(rows)


def torus_separation(q_a: np.ndarray, q_b: np.ndarray, L: float):
    """Minimum-image separation q_a - q_b - L*a with components in [-L/2, L/2).

    Returns (separation vector, integer image a).  The half-open convention
    resolves ties at the cell boundary deterministically: a component exactly
    at +L/2 wraps to -L/2.
    """
    d = np.asarray(q_a, dtype=float) - np.asarray(q_b, dtype=float)
    a = np.floor(d / L + 0.5).astype(int)
    return d - L * a, a


def sample_initial_state(
    params: SystemParams,
    seed: int,
    max_attempts: int = 100_000,
) -> PhaseState:
    """Rejection-sample non-overlapping positions and a normalized velocity set.

    Deterministic for a fixed seed.  Velocities are projected to zero total
    momentum and rescaled to unit kinetic-energy norm (H = 1/2).
    """
    validate(params)
    m = params.mass_array
    if np.any(m <= 0):
        raise ZeroMass("standard sampler requires strictly positive masses")
    rng = np.random.default_rng(seed)
    N, nu, L, r = params.n_balls, params.dim, params.torus_side, params.radius
    min_dist = 2.0 * r + SAMPLING_MARGIN * L

    positions = np.empty((N, nu))
    placed = 0
    attempts = 0
    while placed < N:
        if attempts >= max_attempts:
            raise PackingTimeout(
                f"could not place {N} balls after {max_attempts} attempts"
            )
        attempts += 1
        cand = rng.uniform(0.0, L, size=nu)
        ok = True
        for k in range(placed):
            sep, _ = torus_separation(cand, positions[k], L)
            if np.linalg.norm(sep) < min_dist:
                ok = False
                break
        if ok:
            positions[placed] = cand
            placed += 1

    velocities = rng.standard_normal((N, nu))
    velocities -= (m @ velocities) / m.sum()  # total momentum -> 0
    kinetic = float(np.sum(m[:, None] * velocities**2))
    velocities /= np.sqrt(kinetic)  # sum m |v|^2 -> 1, i.e. H = 1/2
    return PhaseState(positions, velocities, time=0.0)


def to_hat(state: PhaseState, params: SystemParams) -> HatState:
    """Mass-metric coordinate change; reflections become orthogonal in these."""
    m = params.mass_array
    if np.any(m <= 0):
        raise ZeroMass("hat coordinates undefined for zero masses")
    s = np.sqrt(m)[:, None]
    return HatState(s * state.positions, s * state.velocities, state.time)


def with_masses(params: SystemParams, masses) -> SystemParams:
    return replace(params, masses=tuple(float(x) for x in masses))
