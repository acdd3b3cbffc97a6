"""Exception types raised across the package."""


class HexakinError(Exception):
    """Base class for all package errors."""


class GeometryInconsistent(HexakinError):
    """Joint layout cannot be built from the configured dimensions."""


class ParseError(HexakinError):
    """A config or database file could not be parsed."""


class ValidationError(HexakinError):
    """A parsed config violates one of its invariants."""


class DegenerateLeg(HexakinError):
    """A leg has (near) zero length, so its direction is undefined."""


class EmptyDatabase(HexakinError):
    """A query was made against a database with no records."""


class InsufficientRecords(HexakinError):
    """More records were requested than the database holds."""


class SchemaMismatch(HexakinError):
    """A CSV file does not carry the expected columns."""


class ConfigHashMismatch(HexakinError):
    """A database was built with a different machine config."""
