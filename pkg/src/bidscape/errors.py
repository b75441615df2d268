"""Exception hierarchy.

Everything raised on purpose by this package derives from BidscapeError so
callers (and the CLI, which maps data errors to exit code 2) can catch one
type. ValueError/TypeError still surface for plain programming mistakes.
"""


class BidscapeError(Exception):
    """Base class for all package errors."""


class ValidationError(BidscapeError):
    """A record, snapshot, or parameter violates a structural invariant."""


class SchemaError(BidscapeError):
    """A file or payload does not match its documented schema."""


class EmptyLandscapeError(BidscapeError):
    """No observation survived binning; the landscape has no support."""


class CostUndefinedError(BidscapeError):
    """No populated cost bin exists at or below the queried bid."""


class StoreError(BidscapeError):
    """Base class for model store failures."""


class ModelNotFoundError(StoreError):
    """The requested group has no persisted landscape."""


class ModelIntegrityError(StoreError):
    """A persisted landscape exists but cannot be decoded."""
