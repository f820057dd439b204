"""Exception hierarchy.

Three families map onto the CLI exit codes: configuration/validation
problems (exit 2), numeric or domain failures (exit 3), and I/O failures
(exit 4).
"""

from __future__ import annotations


class RisBenchError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(RisBenchError):
    """Invalid specification, configuration, or input data."""

    exit_code = 2


class DomainError(RisBenchError):
    """Numerically or physically meaningless request on valid types."""

    exit_code = 3


class IoError(RisBenchError):
    """Filesystem or serialization failure."""

    exit_code = 4


# -- surface model -----------------------------------------------------------

class InvalidStateCount(ConfigError):
    """Cell state table length is not 2**n_bits."""


class InvalidGamma(ConfigError):
    """Reflection coefficient magnitude or phase outside its domain."""


class NonPositiveParam(ConfigError):
    """A parameter that must be positive is zero or negative."""


class GroupSizeMismatch(ConfigError):
    """Group size does not divide the cell count."""


class LengthMismatch(ConfigError):
    """Group-state vector length disagrees with the layout."""


class InvalidStateIndex(ConfigError):
    """State index outside [0, 2**n_bits - 1]."""


class ConfigMismatch(ConfigError):
    """Configuration matrix incompatible with the surface."""


# -- field engine ------------------------------------------------------------

class SourceBelowSurface(ConfigError):
    """Point source placed at z <= 0."""


class GridMissingPlane(DomainError):
    """Grid lacks the phi = 0 or phi = 180 column required for a cut."""


class AllZeroField(DomainError):
    """Operation undefined on an identically zero field."""


class GridMismatch(DomainError):
    """Two grids do not share the same angular sampling."""


# -- benchmarks --------------------------------------------------------------

class UnknownBenchmark(ConfigError):
    """Benchmark id is not bundled and not a readable file."""


class OverlappingLobes(ConfigError):
    """Two intended beams share part of their lobe regions."""


# -- metrics -----------------------------------------------------------------

class EmptyRegion(DomainError):
    """No grid point falls inside the requested lobe region."""


class ZeroReferenceDirectivity(DomainError):
    """Reference field carries no power in the intended regions."""


# -- optimizer ---------------------------------------------------------------

class SearchSpaceTooLarge(DomainError):
    """Exhaustive enumeration refused beyond the size guard."""


# -- harness -----------------------------------------------------------------

class ConfigParseError(ConfigError):
    """Run-configuration file missing, unreadable, or malformed."""
