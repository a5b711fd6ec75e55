"""Exception types raised across the package.

Every validation error names the violated invariant so that callers can
distinguish a malformed rotation system from a non-planar or disconnected one.
"""


class MapLabError(Exception):
    """Base class for all maplab errors."""


class InvalidInvolution(MapLabError):
    """The edge-reversal permutation is not a fixed-point-free involution."""


class Disconnected(MapLabError):
    """The group generated by sigma and alpha does not act transitively."""


class NonPlanar(MapLabError):
    """Euler characteristic V - E + F differs from 2."""


class UnknownVertex(MapLabError):
    """A vertex id outside the map was supplied."""


class NotAQuadrangulation(MapLabError):
    """The map is not a quadrangulation (a face degree differs from 4)."""


class NotPointingTowards(MapLabError):
    """An oriented edge required to point towards the distinguished vertex does not."""


class BoundExceeded(MapLabError):
    """An exhaustive operation was requested beyond its configured size bound."""


class IndexOutOfRange(MapLabError):
    """A contour index outside [0, 2n] was supplied."""


class FormatError(MapLabError):
    """A textual map, tree or bundle file does not match its documented format."""


class AssertionFailure(MapLabError):
    """A hard (non-statistical) identity failed on a sampled instance.

    Carries the path of the replayable counterexample bundle when one was
    written.
    """

    def __init__(self, message: str, bundle_path: str | None = None):
        super().__init__(message)
        self.bundle_path = bundle_path
