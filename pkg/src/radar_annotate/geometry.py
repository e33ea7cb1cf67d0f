"""Camera-space detections to physical feature points.

Ingested instance detections (produced by an external detector+tracker
and read from JSON lines) are grounded on the image plane, inverted
through the pinhole model onto the ground plane, and differenced over
time to estimate each instance's radial velocity. The result per frame
and instance is a feature point (x, y, v_radial) that seeds the radar
annotation pipeline.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AtOrigin,
    BehindCamera,
    EmptyMask,
    ParseError,
    RayParallelToGround,
    ValidationError,
)
from .rle import rle_decode

VELOCITY_SANITY_CAP_MPS = 50.0


@dataclass
class CameraModel:
    """Pinhole intrinsics A (3x3) and extrinsics B (3x4, world to camera)."""

    intrinsics: np.ndarray
    extrinsics: np.ndarray
    image_width_px: int
    image_height_px: int

    def __post_init__(self):
        self.intrinsics = np.asarray(self.intrinsics, dtype=np.float64)
        self.extrinsics = np.asarray(self.extrinsics, dtype=np.float64)
        if self.intrinsics.shape != (3, 3):
            raise ValidationError("intrinsics must be 3x3")
        if self.extrinsics.shape != (3, 4):
            raise ValidationError("extrinsics must be 3x4")
        if self.intrinsics[0, 0] <= 0 or self.intrinsics[1, 1] <= 0:
            raise ValidationError("focal lengths must be positive")
        rot = self.extrinsics[:, :3]
        if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-6):
            raise ValidationError("extrinsic rotation part is not orthonormal")

    @property
    def projection(self) -> np.ndarray:
        """A @ B, mapping homogeneous world points to homogeneous pixels."""
        return self.intrinsics @ self.extrinsics

    def project(self, world_point) -> tuple:
        """Forward-project a 3D world point; raises BehindCamera when s <= 0."""
        w = np.append(np.asarray(world_point, dtype=np.float64), 1.0)
        q = self.projection @ w
        if q[2] <= 0:
            raise BehindCamera(f"point {world_point} projects with scale {q[2]:.3g}")
        return (q[0] / q[2], q[1] / q[2])


@dataclass
class InstanceDetection:
    """One externally detected instance in one video frame."""

    frame_index: int
    instance_id: int
    category: str
    bounding_box_px: tuple  # (x0, y0, x1, y1)
    mask: np.ndarray | None = None
    confidence: float = 1.0

    def __post_init__(self):
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=bool)
            if not self.mask.any():
                raise ValidationError("mask present but empty")


@dataclass
class FeaturePoint:
    """Physical state of an instance: ground position and radial velocity."""

    world_position: tuple  # (x, y) meters, sensor at the origin
    radial_velocity: float  # m/s, positive when approaching
    frame_index: int
    instance_id: int
    category: str
    missing_history: bool = False

    def __post_init__(self):
        if abs(self.radial_velocity) >= VELOCITY_SANITY_CAP_MPS:
            raise ValidationError(
                f"radial velocity {self.radial_velocity:.1f} m/s fails the "
                f"{VELOCITY_SANITY_CAP_MPS:.0f} m/s sanity cap"
            )

    def as_seed(self) -> np.ndarray:
        return np.array(
            [self.world_position[0], self.world_position[1], self.radial_velocity]
        )


def reference_pixel(detection) -> tuple:
    """Ground-contact pixel of a mask: the bottom-most pixel of the
    mask column nearest the mask's center of mass.

    Accepts an InstanceDetection or a binary mask array. Returns
    (p_x, p_y) with rows growing downward.
    """
    mask = detection.mask if isinstance(detection, InstanceDetection) else detection
    if mask is None:
        raise EmptyMask("detection has no mask")
    mask = np.asarray(mask, dtype=bool)
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        raise EmptyMask("mask has no pixels")
    centroid_x = cols.mean()
    candidates = np.unique(cols)
    col = int(candidates[np.argmin(np.abs(candidates - centroid_x))])
    row = int(rows[cols == col].max())
    return (col, row)


def pixel_to_ground(pixel, camera: CameraModel, ground_height: float = 0.0) -> tuple:
    """Invert the pinhole projection onto the plane z = ground_height.

    Solves the 3x3 linear system in (c_x, c_y, s) from
    s * [p, 1] = A B [c_x, c_y, ground_height, 1].
    """
    m = camera.projection
    p = np.array([pixel[0], pixel[1], 1.0], dtype=np.float64)
    system = np.column_stack([m[:, 0], m[:, 1], -p])
    rhs = -(m[:, 2] * ground_height + m[:, 3])
    if abs(np.linalg.det(system)) < 1e-10:
        raise RayParallelToGround(f"pixel {pixel} ray does not meet the ground plane")
    cx, cy, s = np.linalg.solve(system, rhs)
    if s <= 0:
        raise BehindCamera(f"pixel {pixel} meets the ground behind the camera (s={s:.3g})")
    return (float(cx), float(cy))


def estimate_velocity(c_now, c_prev, delta_t: float) -> np.ndarray:
    """Ground-plane velocity from two positions delta_t apart."""
    if not delta_t > 0:
        raise ValidationError("delta_t must be > 0")
    return (np.asarray(c_now, dtype=np.float64) - np.asarray(c_prev, dtype=np.float64)) / delta_t


def radial_velocity(velocity, position) -> float:
    """Signed radial speed of a velocity at a position, positive when the
    range to the origin decreases."""
    position = np.asarray(position, dtype=np.float64)
    norm = float(np.linalg.norm(position))
    if norm == 0.0:
        raise AtOrigin("radial velocity undefined at the sensor origin")
    return float(-(np.asarray(velocity, dtype=np.float64) @ position) / norm)


def build_feature_points(detections, camera: CameraModel,
                         frame_period_s: float, delta_t: float = 1.0,
                         ground_height: float = 0.0) -> list:
    """Per-frame, per-instance feature points from a detection sequence.

    Velocities difference each position against the instance's frame
    nearest delta_t earlier (the nearest later frame for first
    appearances). Isolated single-frame instances are flagged and get
    zero velocity.
    """
    by_instance: dict = {}
    for det in detections:
        by_instance.setdefault(det.instance_id, []).append(det)

    features = []
    for instance_id in sorted(by_instance):
        dets = sorted(by_instance[instance_id], key=lambda d: d.frame_index)
        frames = [d.frame_index for d in dets]
        grounds = {}
        for det in dets:
            grounds[det.frame_index] = pixel_to_ground(
                reference_pixel(det), camera, ground_height
            )
        for det in dets:
            t = det.frame_index
            earlier = [f for f in frames if f < t]
            later = [f for f in frames if f > t]
            if earlier:
                other = min(earlier, key=lambda f: abs((t - f) * frame_period_s - delta_t))
            elif later:
                other = min(later, key=lambda f: abs((f - t) * frame_period_s - delta_t))
            else:
                other = None
            if other is None:
                v_r, flagged = 0.0, True
            else:
                gap = (t - other) * frame_period_s
                v = estimate_velocity(grounds[t], grounds[other], gap)
                v_r, flagged = radial_velocity(v, grounds[t]), False
            features.append(
                FeaturePoint(
                    world_position=grounds[t],
                    radial_velocity=v_r,
                    frame_index=t,
                    instance_id=instance_id,
                    category=det.category,
                    missing_history=flagged,
                )
            )
    features.sort(key=lambda f: (f.frame_index, f.instance_id))
    return features


def load_camera(path) -> CameraModel:
    """Read a calibration JSON {A, B, width, height}."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    try:
        return CameraModel(
            intrinsics=np.asarray(data["A"], dtype=np.float64),
            extrinsics=np.asarray(data["B"], dtype=np.float64),
            image_width_px=int(data["width"]),
            image_height_px=int(data["height"]),
        )
    except KeyError as exc:
        raise ParseError(f"{path}: missing calibration field {exc}") from exc


def load_detections(path) -> list:
    """Read instance detections from JSON lines."""
    detections = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                mask = rle_decode(rec["mask_rle"]) if rec.get("mask_rle") else None
                detections.append(
                    InstanceDetection(
                        frame_index=int(rec["frame"]),
                        instance_id=int(rec["id"]),
                        category=rec["category"],
                        bounding_box_px=tuple(rec["box"]),
                        mask=mask,
                        confidence=float(rec.get("score", 1.0)),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc
    return detections
