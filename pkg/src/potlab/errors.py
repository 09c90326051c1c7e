"""Exception types shared across the package."""


class PotlabError(Exception):
    """Base class for all package errors."""


class MeshError(PotlabError):
    """Bad mesh input: parse failure, open surface, degenerate triangle."""


class SolveError(PotlabError):
    """Dense boundary solve failed or produced non-finite output."""


class ExtractionError(PotlabError):
    """Level-surface extraction failed (box too small, empty level, ...)."""


class DomainError(PotlabError):
    """A point was not in the required domain (inside the body, off surface)."""


class ConfigError(PotlabError):
    """Invalid run configuration or command-line input."""
