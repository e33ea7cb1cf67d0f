"""Cluster association, centroid tracking, and annotation emission.

A seed point (from the vision pipeline or simulator ground truth) picks
the nearest stable cluster in its frame's DoA-Doppler cloud. The
cluster centroid then seeds the neighboring frames, forward to the end
of the sequence and backward to its start. Every tracked cluster is
projected into both radar views as sparse bins, from which boxes and
dilated dense masks follow.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .bandwidth import BandwidthGrid, select_bandwidth
from .cloud import DoaCloud
from .config import RadarConfig
from .errors import (
    AssociationTooFar,
    BinOverflow,
    EmptyCloud,
    EmptySet,
    SeedAssociationFailed,
    ValidationError,
)
from .meanshift import Cluster
from .rle import rle_decode, rle_encode
from .seeding import derive_seed


@dataclass
class ClusteringConfig:
    """Knobs for mean shift and bandwidth selection in normalized space.

    ``scales`` divides (x, y, doppler) before clustering so one spherical
    bandwidth spans meters and meters-per-second sensibly.
    """

    bandwidth_grid: np.ndarray = field(default_factory=lambda: np.geomspace(0.1, 2.0, 16))
    scales: tuple = (1.0, 1.0, 1.0)
    tol: float = 1e-4
    max_iter: int = 300
    mc_samples: int = 4096


@dataclass
class AnnotatorConfig:
    dilation_radius_bins: int = 2
    max_lost_frames: int = 5
    association_max_distance: float = 2.0  # normalized units

    def __post_init__(self):
        if self.dilation_radius_bins < 0:
            raise ValidationError("dilation_radius_bins must be >= 0")
        if self.max_lost_frames < 0:
            raise ValidationError("max_lost_frames must be >= 0")
        if not self.association_max_distance > 0:
            raise ValidationError("association_max_distance must be > 0")


@dataclass
class Association:
    """Winning cluster for a seed, in original cloud units."""

    cluster: Cluster
    sigma: float
    distance: float  # centroid-to-seed distance, normalized units


def associate_cluster(cloud, seed_point, clustering: ClusteringConfig | None = None,
                      max_distance: float = 2.0, rng_seed: int = 0) -> Association:
    """Select the stable cluster nearest a seed point.

    Coordinates are divided by the configured scales, the bandwidth-grid
    selection runs in that space, and the result is mapped back. Raises
    AssociationTooFar when the winning centroid is farther from the seed
    than ``max_distance`` normalized units, and EmptyCloud on an empty
    frame.
    """
    clustering = clustering or ClusteringConfig()
    points = np.asarray(getattr(cloud, "points", cloud), dtype=np.float64).reshape(-1, 3)
    if points.shape[0] == 0:
        raise EmptyCloud("no points to associate against")
    scales = np.asarray(clustering.scales, dtype=np.float64)
    seed_norm = np.asarray(seed_point, dtype=np.float64).reshape(-1) / scales

    selection = select_bandwidth(
        points / scales,
        seed_norm,
        grid=BandwidthGrid(clustering.bandwidth_grid),
        tol=clustering.tol,
        max_iter=clustering.max_iter,
        mc_samples=clustering.mc_samples,
        rng_seed=rng_seed,
    )
    norm_cluster = selection.cluster
    distance = float(np.linalg.norm(norm_cluster.centroid - seed_norm))
    if distance > max_distance:
        raise AssociationTooFar(distance, max_distance)
    cluster = Cluster(
        indices=norm_cluster.indices,
        points=points[norm_cluster.indices],
        centroid=norm_cluster.centroid * scales,
        converged=norm_cluster.converged,
    )
    return Association(cluster=cluster, sigma=selection.sigma, distance=distance)


STATUS_SEEDED = "seeded"
STATUS_PROPAGATED = "propagated"
STATUS_LOST = "lost"


@dataclass
class TrackFrame:
    frame_index: int
    status: str
    cluster: Cluster | None
    seed: np.ndarray


@dataclass
class Track:
    """Per-frame clusters of one instance, indexed by frame."""

    frames: list
    instance_id: int | None = None
    category: str | None = None

    def frame(self, index: int) -> TrackFrame | None:
        for tf in self.frames:
            if tf.frame_index == index:
                return tf
        return None

    @property
    def frame_indices(self) -> list:
        return [tf.frame_index for tf in self.frames]

    @property
    def annotated_frames(self) -> list:
        return [tf for tf in self.frames if tf.cluster is not None]


def track_sequence(clouds, seed_frame: int, seed_point,
                   clustering: ClusteringConfig | None = None,
                   annotator: AnnotatorConfig | None = None,
                   rng_seed: int = 0,
                   instance_id: int | None = None,
                   category: str | None = None) -> Track:
    """Track a seeded instance across a sequence of DoA-Doppler clouds.

    ``clouds`` is indexed by frame; entries may be None or empty. After
    association at the seed frame, cluster centroids propagate as seeds
    frame by frame, forward then backward. A frame whose cloud is empty
    or whose best cluster is too far goes lost and the last good
    centroid is reused; the direction terminates after
    ``max_lost_frames`` consecutive losses.
    """
    clustering = clustering or ClusteringConfig()
    annotator = annotator or AnnotatorConfig()
    n = len(clouds)
    if not 0 <= seed_frame < n:
        raise ValidationError(f"seed frame {seed_frame} outside sequence of {n}")
    seed_point = np.asarray(seed_point, dtype=np.float64).reshape(-1)

    def attempt(frame_index, seed):
        cloud = clouds[frame_index]
        if cloud is None or len(cloud) == 0:
            raise EmptyCloud(f"frame {frame_index} has no cloud")
        return associate_cluster(
            cloud, seed, clustering,
            max_distance=annotator.association_max_distance,
            rng_seed=derive_seed(rng_seed, "assoc", frame_index),
        )

    try:
        assoc = attempt(seed_frame, seed_point)
    except (EmptyCloud, AssociationTooFar) as exc:
        raise SeedAssociationFailed(str(exc)) from exc

    entries = [TrackFrame(seed_frame, STATUS_SEEDED, assoc.cluster, seed_point.copy())]

    def sweep(frame_range, start_centroid):
        seed = start_centroid
        lost = 0
        for t in frame_range:
            try:
                a = attempt(t, seed)
            except (EmptyCloud, AssociationTooFar):
                lost += 1
                entries.append(TrackFrame(t, STATUS_LOST, None, np.asarray(seed).copy()))
                if lost >= annotator.max_lost_frames:
                    return
                continue
            lost = 0
            entries.append(TrackFrame(t, STATUS_PROPAGATED, a.cluster, np.asarray(seed).copy()))
            seed = a.cluster.centroid

    sweep(range(seed_frame + 1, n), assoc.cluster.centroid)
    sweep(range(seed_frame - 1, -1, -1), assoc.cluster.centroid)

    entries.sort(key=lambda tf: tf.frame_index)
    return Track(frames=entries, instance_id=instance_id, category=category)


# ---------------------------------------------------------------------------
# Projections into the radar views
# ---------------------------------------------------------------------------

def _clamp_bins(rows, cols, dims, view: str) -> np.ndarray:
    clipped_rows = np.clip(rows, 0, dims[0] - 1)
    clipped_cols = np.clip(cols, 0, dims[1] - 1)
    if np.any(clipped_rows != rows) or np.any(clipped_cols != cols):
        warnings.warn(f"{view} projection clamped out-of-map bins", BinOverflow)
    bins = np.stack([clipped_rows, clipped_cols], axis=1)
    return np.unique(bins, axis=0)


def project_rd(cluster, config: RadarConfig) -> np.ndarray:
    """Cluster members to unique (range_bin, doppler_bin) pairs."""
    points = np.asarray(getattr(cluster, "points", cluster), dtype=np.float64).reshape(-1, 3)
    if points.shape[0] == 0:
        raise EmptySet("cannot project an empty cluster")
    r = np.hypot(points[:, 0], points[:, 1])
    range_bins = np.floor(r / config.range_resolution_m).astype(np.int64)
    doppler_bins = config.doppler_center_bin + np.rint(
        points[:, 2] / config.velocity_resolution_mps
    ).astype(np.int64)
    dims = (config.samples_per_chirp, config.chirps_per_frame)
    return _clamp_bins(range_bins, doppler_bins, dims, "range-Doppler")


def project_ra(cluster, config: RadarConfig) -> np.ndarray:
    """Cluster members to unique (range_bin, angle_bin) pairs."""
    points = np.asarray(getattr(cluster, "points", cluster), dtype=np.float64).reshape(-1, 3)
    if points.shape[0] == 0:
        raise EmptySet("cannot project an empty cluster")
    r = np.hypot(points[:, 0], points[:, 1])
    sin_az = np.divide(points[:, 0], r, out=np.zeros_like(r), where=r > 0)
    range_bins = np.floor(r / config.range_resolution_m).astype(np.int64)
    angle_bins = config.angle_center_bin + np.rint(
        sin_az * config.angle_center_bin
    ).astype(np.int64)
    dims = (config.samples_per_chirp, config.num_angle_bins)
    return _clamp_bins(range_bins, angle_bins, dims, "range-angle")


def bounding_box(points) -> tuple:
    """Coordinate-wise min/max corners ((min0, min1), (max0, max1))."""
    pts = np.asarray(points).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise EmptySet("bounding box of an empty set")
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    return ((int(lo[0]), int(lo[1])), (int(hi[0]), int(hi[1])))


def dense_mask(points, radius: int, dims) -> np.ndarray:
    """Union of discrete disks of the given radius around each point,
    clipped to ``dims``."""
    pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise EmptySet("dense mask of an empty set")
    if radius < 0:
        raise ValidationError("radius must be >= 0")
    span = np.arange(-radius, radius + 1)
    dr, dc = np.meshgrid(span, span, indexing="ij")
    keep = dr * dr + dc * dc <= radius * radius
    offsets = np.stack([dr[keep], dc[keep]], axis=1)
    cells = (pts[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
    inside = (
        (cells[:, 0] >= 0) & (cells[:, 0] < dims[0])
        & (cells[:, 1] >= 0) & (cells[:, 1] < dims[1])
    )
    mask = np.zeros(dims, dtype=bool)
    mask[cells[inside, 0], cells[inside, 1]] = True
    return mask


@dataclass
class Annotation:
    """Sparse points, box and dense mask of one instance in both views."""

    frame_index: int
    instance_id: int
    category: str
    rd_sparse: np.ndarray
    ra_sparse: np.ndarray
    rd_box: tuple
    ra_box: tuple
    rd_mask: np.ndarray
    ra_mask: np.ndarray

    def validate(self):
        for sparse, box, mask, view in (
            (self.rd_sparse, self.rd_box, self.rd_mask, "rd"),
            (self.ra_sparse, self.ra_box, self.ra_mask, "ra"),
        ):
            (r0, c0), (r1, c1) = box
            if not (0 <= r0 <= r1 < mask.shape[0] and 0 <= c0 <= c1 < mask.shape[1]):
                raise ValidationError(f"{view} box {box} outside map {mask.shape}")
            if np.any(sparse[:, 0] < r0) or np.any(sparse[:, 0] > r1) \
                    or np.any(sparse[:, 1] < c0) or np.any(sparse[:, 1] > c1):
                raise ValidationError(f"{view} sparse points escape their box")
            if not mask[sparse[:, 0], sparse[:, 1]].all():
                raise ValidationError(f"{view} sparse points escape their mask")
            if bool(sparse.shape[0]) != bool(mask.any()):
                raise ValidationError(f"{view} mask emptiness mismatches sparse set")

    def to_dict(self) -> dict:
        def view(sparse, box, mask):
            return {
                "sparse": [[int(a), int(b)] for a, b in sparse],
                "box": [[int(box[0][0]), int(box[0][1])], [int(box[1][0]), int(box[1][1])]],
                "mask_rle": rle_encode(mask),
            }

        return {
            "frame": self.frame_index,
            "id": self.instance_id,
            "category": self.category,
            "rd": view(self.rd_sparse, self.rd_box, self.rd_mask),
            "ra": view(self.ra_sparse, self.ra_box, self.ra_mask),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Annotation":
        def view(entry):
            sparse = np.asarray(entry["sparse"], dtype=np.int64).reshape(-1, 2)
            box = (tuple(entry["box"][0]), tuple(entry["box"][1]))
            return sparse, box, rle_decode(entry["mask_rle"])

        rd_sparse, rd_box, rd_mask = view(data["rd"])
        ra_sparse, ra_box, ra_mask = view(data["ra"])
        return cls(
            frame_index=int(data["frame"]),
            instance_id=int(data["id"]),
            category=data["category"],
            rd_sparse=rd_sparse, ra_sparse=ra_sparse,
            rd_box=rd_box, ra_box=ra_box,
            rd_mask=rd_mask, ra_mask=ra_mask,
        )


def build_annotation(cluster: Cluster, config: RadarConfig, frame_index: int,
                     instance_id: int, category: str,
                     dilation_radius: int = 2) -> Annotation:
    """Project a cluster into both views and assemble the annotation."""
    rd_sparse = project_rd(cluster, config)
    ra_sparse = project_ra(cluster, config)
    rd_dims = (config.samples_per_chirp, config.chirps_per_frame)
    ra_dims = (config.samples_per_chirp, config.num_angle_bins)
    annotation = Annotation(
        frame_index=frame_index,
        instance_id=instance_id,
        category=category,
        rd_sparse=rd_sparse,
        ra_sparse=ra_sparse,
        rd_box=bounding_box(rd_sparse),
        ra_box=bounding_box(ra_sparse),
        rd_mask=dense_mask(rd_sparse, dilation_radius, rd_dims),
        ra_mask=dense_mask(ra_sparse, dilation_radius, ra_dims),
    )
    annotation.validate()
    return annotation


def annotate_track(track: Track, config: RadarConfig,
                   annotator: AnnotatorConfig | None = None) -> list:
    """Annotations for every tracked (non-lost) frame of a track."""
    annotator = annotator or AnnotatorConfig()
    return [
        build_annotation(
            tf.cluster, config, tf.frame_index,
            track.instance_id if track.instance_id is not None else -1,
            track.category or "car",
            dilation_radius=annotator.dilation_radius_bins,
        )
        for tf in track.frames
        if tf.cluster is not None
    ]
