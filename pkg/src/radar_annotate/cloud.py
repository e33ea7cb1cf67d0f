"""Range-angle detections converted to the Cartesian DoA-Doppler cloud.

Each detection bin becomes a 3D point (x, y, doppler): bin-center range
and the angle grid give the position, and the Doppler coordinate is
borrowed from the strongest range-Doppler bin at the same range. When
two objects share a range bin the stronger one wins the Doppler vote;
that limitation is inherent to the range-only association.
"""

from dataclasses import dataclass, field

import numpy as np

from .config import RadarConfig
from .errors import BinOutOfRange, DimensionMismatch


@dataclass
class DoaCloud:
    """Sparse 3D point cloud: columns (x_m, y_m, doppler_mps)."""

    points: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    source_bins: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int64))
    frame_index: int = 0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        self.source_bins = np.asarray(self.source_bins, dtype=np.int64).reshape(-1, 2)

    def __len__(self) -> int:
        return self.points.shape[0]

    def to_dict(self) -> dict:
        return {
            "frame": self.frame_index,
            "points": [[float(v) for v in p] for p in self.points],
            "bins": [[int(b) for b in row] for row in self.source_bins],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DoaCloud":
        points = np.asarray(data.get("points", []), dtype=np.float64).reshape(-1, 3)
        bins = np.asarray(data.get("bins", []), dtype=np.int64).reshape(-1, 2)
        return cls(points=points, source_bins=bins, frame_index=int(data.get("frame", 0)))


def to_doa_cloud(detections, rd_map: np.ndarray, config: RadarConfig,
                 frame_index: int = 0) -> DoaCloud:
    """Convert range-angle CFAR detections into a DoA-Doppler cloud.

    ``detections`` is the ((range_bin, angle_bin), magnitude) list from
    :func:`radar_annotate.cfar.cfar_detect` run on the range-angle map.
    Detections whose bin-center range exceeds the configured maximum
    range are dropped so every cloud point stays inside it.
    """
    rd_map = np.asarray(rd_map)
    if rd_map.shape != (config.samples_per_chirp, config.chirps_per_frame):
        raise DimensionMismatch(
            f"rd_map shape {rd_map.shape} does not match config "
            f"({config.samples_per_chirp}, {config.chirps_per_frame})"
        )
    points = []
    bins = []
    for (range_bin, angle_bin), _mag in detections:
        if not (0 <= range_bin < config.samples_per_chirp):
            raise BinOutOfRange(f"range bin {range_bin} outside the map")
        if not (0 <= angle_bin < config.num_angle_bins):
            raise BinOutOfRange(f"angle bin {angle_bin} outside the map")
        r = config.range_of_bin(range_bin)
        if r > config.max_range_m:
            continue
        sin_az = config.sin_of_angle_bin(angle_bin)
        cos_az = np.sqrt(1.0 - sin_az * sin_az)
        doppler_bin = int(np.argmax(rd_map[range_bin, :]))
        v = config.velocity_of_doppler_bin(doppler_bin)
        points.append((r * sin_az, r * cos_az, v))
        bins.append((range_bin, angle_bin))
    return DoaCloud(
        points=np.asarray(points, dtype=np.float64).reshape(-1, 3),
        source_bins=np.asarray(bins, dtype=np.int64).reshape(-1, 2),
        frame_index=frame_index,
    )
