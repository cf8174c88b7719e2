"""Exception hierarchy shared across the package."""


class GeowlError(Exception):
    """Base class for all library-level failures."""


class CapExceededError(GeowlError):
    """A configured resource cap (tuple count, candidate count, depth) was hit."""


class NotRealizableError(GeowlError):
    """A squared-distance matrix cannot be embedded in the requested dimension."""


class InconsistentDataError(GeowlError):
    """Distance data contradicts itself beyond tolerance."""


class ReconstructionError(GeowlError):
    """A reconstruction attempt could not be completed."""


class ParameterMismatchError(GeowlError):
    """Two fingerprints were compared with incompatible parameters."""
