"""Exception types shared across the package."""


class TaubnutError(Exception):
    """Base class for all library errors."""


class DomainError(TaubnutError):
    """Evaluation outside the chart: r <= n, r below a family's turning radius, etc."""


class AxisError(TaubnutError):
    """Evaluation too close to the polar axis where 1/sin(theta) terms blow up."""


class DegenerateError(TaubnutError):
    """Degenerate family constants (r1 = 0, or a vanishing denominator like R - n)."""


class ConfigError(TaubnutError):
    """Invalid configuration values (tolerances, modes, malformed family records)."""


class RangeError(TaubnutError):
    """Requested value outside the attained range of a monotone branch."""


class NotAGeodesic(TaubnutError):
    """State pattern incompatible with the geodesic equations (constant r with motion)."""
