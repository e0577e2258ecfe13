"""Exception types shared across the package."""


class OscsegError(Exception):
    """Base class for all package-specific errors."""


class NumericalBlowup(OscsegError):
    """A state component became non-finite during integration."""


class DegenerateValues(OscsegError, ValueError):
    """An operation received values with no usable structure (e.g. all equal)."""


class DimensionMismatch(OscsegError, ValueError):
    """Two grids that must share dimensions do not."""


class InvalidSize(OscsegError, ValueError):
    """A generator was asked for a size it cannot honor."""


class PgmError(OscsegError, ValueError):
    """Base class for PGM parsing failures."""


class MalformedHeader(PgmError):
    """The PGM header is missing, has the wrong magic, or is unparseable."""


class TruncatedData(PgmError):
    """The PGM pixel section ends before width*height samples."""


class UnsupportedMaxval(PgmError):
    """The PGM maxval is outside the supported 1..255 range."""


class ConfigError(OscsegError, ValueError):
    """A run configuration is inconsistent or refers to missing inputs."""
