"""Exception hierarchy shared across the package."""


class RydchirpError(Exception):
    """Base class for all package-specific errors."""


class BasisSizeError(RydchirpError, ValueError):
    """Requested collective basis exceeds the configured size cap."""


class GeometryError(RydchirpError, ValueError):
    """Lattice geometry cannot define pairwise interactions."""


class EntanglementUndefinedError(RydchirpError, ValueError):
    """Entanglement observable requested for fewer than two atoms."""


class IntegrationDivergedError(RydchirpError, RuntimeError):
    """Propagation lost norm beyond tolerance; a smaller step is needed."""


class ToleranceError(RydchirpError, RuntimeError):
    """Refinement loop exhausted without meeting the requested tolerance."""


class NoCrossingError(RydchirpError, ValueError):
    """The collective Rydberg level never crosses the ground level."""


class SingularityError(RydchirpError, ValueError):
    """Effective-model formula evaluated at a singular parameter point."""


class ProtocolError(RydchirpError, ValueError):
    """Operation applied to a result produced under the wrong protocol."""


class ConfigError(RydchirpError, ValueError):
    """Run configuration failed schema or semantic validation."""
