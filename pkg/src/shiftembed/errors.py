"""Exception hierarchy shared across the package.

Every error raised on a structural failure carries enough provenance
(scale, block, width) to locate the offending object.
"""


class ShiftEmbedError(Exception):
    """Base class for all package errors."""


class SpecParseError(ShiftEmbedError):
    """Malformed system/point/schedule document."""


class EmptySubshiftError(ShiftEmbedError):
    """Forbidden words kill every bi-infinite sequence."""


class InvalidPointError(ShiftEmbedError):
    """Point representation is not admissible for its system."""


class WidthCapError(ShiftEmbedError):
    """A clopen refinement would exceed the configured cylinder-width cap."""


class EnumerationBudgetError(ShiftEmbedError):
    """A word enumeration would exceed the configured size budget."""


class SeparationError(ShiftEmbedError):
    """Cylinder radius too small to separate periodic orbits; enlarge r."""


class ScheduleError(ShiftEmbedError):
    """No admissible scale schedule (e.g. h_top >= log K), or invalid override."""


class CapacityError(ShiftEmbedError):
    """Codebook domain exceeds K**length, or a block is too short for its budgets."""

    def __init__(self, message, scale=None, block=None):
        super().__init__(message)
        self.scale = scale
        self.block = block


class MalformedStreamError(ShiftEmbedError):
    """Symbol stream admits no consistent block parse."""


class AmbiguousStreamError(MalformedStreamError):
    """Symbol stream admits more than one consistent block parse on the window."""


class WindowError(ShiftEmbedError):
    """Window too small for the requested operation (caller must widen)."""
