"""Exception taxonomy shared across the package.

Every error raised by dynaprune derives from DynapruneError so callers can
catch the whole family with one clause. Subclasses that correspond to common
Python failure modes also inherit the matching builtin (ValueError,
IndexError) so generic code keeps working.
"""

from __future__ import annotations


class DynapruneError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(DynapruneError):
    """A binary or CSV artifact is malformed: bad magic, truncated payload,
    CRC mismatch, or header fields that violate the format contract."""


class DataError(DynapruneError):
    """Payload content is invalid even though the container parsed: rows that
    do not sum to one, non-finite values, labels out of range."""


class ShapeError(DynapruneError, ValueError):
    """An array argument has the wrong rank or incompatible dimensions."""


class ParameterError(DynapruneError, ValueError):
    """A scalar argument is outside its documented domain."""


class RangeError(DynapruneError, IndexError):
    """An index (epoch, sample, block) is out of bounds for the artifact."""


class CapacityError(DynapruneError):
    """A writer was asked to exceed its declared capacity, or was finalized
    before receiving everything it was declared to hold."""


class TrainingError(DynapruneError):
    """Training diverged or produced non-finite state."""
