"""Exception hierarchy shared by the simulation and analysis layers."""


class HardBallError(Exception):
    """Base class for all package errors."""


class ConfigError(HardBallError):
    """Malformed or inconsistent run configuration."""


class OverlapGeometry(ConfigError):
    """4r >= L: a ball would overlap its own periodic image."""


class DegenerateMasses(ConfigError):
    """Fewer than two strictly positive masses."""


class BadDimension(ConfigError):
    """N < 2 or nu < 2."""


class ZeroMass(HardBallError):
    """Operation requires all masses strictly positive."""


class PackingTimeout(HardBallError):
    """Rejection sampling of non-overlapping positions exceeded the attempt cap."""


class TangentialApproach(HardBallError):
    """Near-grazing collision: quadratic discriminant below the tangency guard."""


class TangentialEvent(HardBallError):
    """Tangent map requested at a grazing event; the derivative blows up."""


class NotInContact(HardBallError):
    """apply_collision called with the pair not on the contact sphere."""


class RecedingPair(HardBallError):
    """apply_collision called with the pair separating along the line of centers."""


class SimultaneousCollision(HardBallError):
    """Two distinct collision events predicted within the simultaneity guard."""


class AccumulationGuard(HardBallError):
    """Event rate exceeded the per-unit-time cap; indicates a numerical fault."""


class SingularSegment(HardBallError):
    """Segment contains a tangential or otherwise degenerate event."""


class SchemeChanged(HardBallError):
    """A finite-difference probe altered the symbolic sequence or adjustment vectors."""


class NotConnectedPair(HardBallError):
    """Connecting path requested for balls in different collision-graph components."""


class MethodDisagreement(HardBallError):
    """Independent neutral-space methods returned different dimensions (a bug signal)."""
