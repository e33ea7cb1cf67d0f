"""Exception types raised across the toolkit.

Every error that callers are expected to catch derives from
:class:`RadarAnnotateError` so pipeline code can attach frame/instance
context in one place.
"""


class RadarAnnotateError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(RadarAnnotateError):
    """A configuration or input value violates an invariant."""


class ParseError(RadarAnnotateError):
    """A file could not be parsed; message names the file and field."""


# --- radar signal model ---

class AngleOutOfRange(RadarAnnotateError):
    """Azimuth at or beyond +-90 degrees where the array response is singular."""


class TargetOutOfRange(RadarAnnotateError):
    """A scene object lies beyond the configured maximum range."""


class AmbiguousVelocity(UserWarning):
    """Radial speed exceeds the unambiguous limit; the response aliases."""


class DimensionMismatch(RadarAnnotateError):
    """Array dimensions do not match the radar configuration."""


# --- detection / point cloud ---

class WindowTooLarge(RadarAnnotateError):
    """CFAR window does not fit inside the map."""


class BinOutOfRange(RadarAnnotateError):
    """A detection indexes a bin outside the map."""


# --- clustering ---

class EmptyCloud(RadarAnnotateError):
    """Operation requires at least one cloud point."""


class GridTooSmall(RadarAnnotateError):
    """Bandwidth grid needs at least three values."""


class SingularCovariance(RadarAnnotateError):
    """Covariance matrix is not positive definite."""


class DegenerateCluster(RadarAnnotateError):
    """Cluster has fewer than two points; no sample covariance exists."""


# --- camera geometry ---

class EmptyMask(RadarAnnotateError):
    """Segmentation mask contains no pixels."""


class RayParallelToGround(RadarAnnotateError):
    """Back-projected pixel ray does not intersect the ground plane."""


class BehindCamera(RadarAnnotateError):
    """Ground intersection has non-positive projective scale."""


class AtOrigin(RadarAnnotateError):
    """Radial velocity is undefined at the sensor origin."""


class MissingHistory(RadarAnnotateError):
    """Instance has no other frame to difference against."""


# --- annotation ---

class EmptySet(RadarAnnotateError):
    """Operation requires a non-empty point set."""


class BinOverflow(UserWarning):
    """Projected bins fell outside the map and were clamped."""


class AssociationTooFar(RadarAnnotateError):
    """Closest cluster centroid is farther from the seed than the threshold."""

    def __init__(self, distance, threshold):
        super().__init__(
            f"closest cluster centroid is {distance:.3f} normalized units "
            f"from the seed (threshold {threshold:.3f})"
        )
        self.distance = distance
        self.threshold = threshold


class SeedAssociationFailed(RadarAnnotateError):
    """Association failed at the seeding frame itself."""


# --- metrics ---

class PointOutOfBounds(RadarAnnotateError):
    """A labeled point lies outside the map."""
