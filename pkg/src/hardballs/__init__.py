"""Hard-ball gas on a flat torus: event-driven dynamics and hyperbolicity analysis."""

from .combinatorics import (
    SymbolicScheme,
    check_property_A,
    components,
    is_connected,
    richness,
    threshold_C,
)
from .dynamics import conserved, pair_collision_time, reverse, simulate
from .errors import HardBallError
from .exact import ExactSimulator, exact_segment, precision_for
from .lyapunov import (
    Spectrum,
    TangentFrame,
    lyapunov_spectrum,
    relevant_nonzero,
    tangent_collision_map,
)
from .model import (
    CollisionEvent,
    OrbitSegment,
    PhaseState,
    SystemParams,
    sample_initial_state,
    torus_separation,
    validate,
)
from .neutral import (
    NeutralBasis,
    SegmentData,
    advance_system,
    cpf_coefficients,
    cpf_verify,
    is_sufficient,
    neutral_direct,
    neutral_jacobian,
)

__version__ = "0.1.0"

__all__ = [
    "CollisionEvent",
    "ExactSimulator",
    "HardBallError",
    "NeutralBasis",
    "OrbitSegment",
    "PhaseState",
    "SegmentData",
    "Spectrum",
    "SymbolicScheme",
    "SystemParams",
    "TangentFrame",
    "advance_system",
    "check_property_A",
    "components",
    "conserved",
    "cpf_coefficients",
    "cpf_verify",
    "exact_segment",
    "is_connected",
    "is_sufficient",
    "lyapunov_spectrum",
    "neutral_direct",
    "neutral_jacobian",
    "pair_collision_time",
    "precision_for",
    "relevant_nonzero",
    "reverse",
    "richness",
    "sample_initial_state",
    "simulate",
    "tangent_collision_map",
    "threshold_C",
    "torus_separation",
    "validate",
]
