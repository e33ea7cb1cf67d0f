"""Ground-truth scenes: point reflectors with per-frame trajectories.

A scenario JSON file holds the objects plus optional radar-config
overrides::

    {
      "radar": {"max_range_m": 50.0},
      "objects": [
        {"id": 1, "category": "car", "amplitude": 1.0,
         "trajectory": [[0.0, 40.0], [0.0, 39.8], null]}
      ]
    }

A ``null`` trajectory entry means the object is absent from that frame
(left the field of view), which lets tracking tests exercise lost-track
termination.
"""

import json
import math
from dataclasses import dataclass, field

from .config import RadarConfig
from .errors import ParseError, ValidationError

CATEGORIES = ("pedestrian", "cyclist", "car")


@dataclass
class SceneObject:
    instance_id: int
    category: str
    trajectory: list  # per-frame (x, y) in meters, or None when absent
    reflectivity_amplitude: float = 1.0

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValidationError(
                f"category {self.category!r} not one of {CATEGORIES}"
            )
        if not self.reflectivity_amplitude > 0:
            raise ValidationError("reflectivity_amplitude must be > 0")

    def position(self, frame_index: int):
        """Ground position at a frame, or None when absent."""
        p = self.trajectory[frame_index]
        return None if p is None else (float(p[0]), float(p[1]))

    def approach_velocity(self, frame_index: int, frame_period_s: float) -> float:
        """Signed radial speed from consecutive trajectory points.

        Positive when the range to the sensor is decreasing. The first
        frame (or a frame whose predecessor is absent) uses the forward
        difference; an isolated frame reports 0.
        """
        cur = self.position(frame_index)
        if cur is None:
            raise ValidationError(f"object {self.instance_id} absent at frame {frame_index}")
        r_cur = math.hypot(*cur)
        prev = self.trajectory[frame_index - 1] if frame_index > 0 else None
        if prev is not None:
            r_prev = math.hypot(float(prev[0]), float(prev[1]))
            return -(r_cur - r_prev) / frame_period_s
        nxt = (
            self.trajectory[frame_index + 1]
            if frame_index + 1 < len(self.trajectory)
            else None
        )
        if nxt is not None:
            r_next = math.hypot(float(nxt[0]), float(nxt[1]))
            return -(r_next - r_cur) / frame_period_s
        return 0.0


@dataclass
class Scene:
    objects: list[SceneObject] = field(default_factory=list)
    radar_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(o.trajectory) for o in self.objects}
        if len(lengths) > 1:
            raise ValidationError(f"trajectory lengths differ: {sorted(lengths)}")

    @property
    def num_frames(self) -> int:
        return len(self.objects[0].trajectory) if self.objects else 0

    def validate_ranges(self, config: RadarConfig):
        for obj in self.objects:
            for i, p in enumerate(obj.trajectory):
                if p is None:
                    continue
                r = math.hypot(float(p[0]), float(p[1]))
                if r > config.max_range_m:
                    raise ValidationError(
                        f"object {obj.instance_id} at frame {i} is {r:.2f} m out, "
                        f"beyond max range {config.max_range_m:.2f} m"
                    )

    def radar_config(self, base: RadarConfig | None = None) -> RadarConfig:
        """Base config with this scene's overrides applied."""
        data = (base or RadarConfig()).to_dict()
        data.update(self.radar_overrides)
        return RadarConfig.from_dict(data)

    def ground_truth_state(self, instance_id: int, frame_index: int,
                           frame_period_s: float):
        """(x, y, approach velocity) of an instance at a frame."""
        for obj in self.objects:
            if obj.instance_id == instance_id:
                pos = obj.position(frame_index)
                if pos is None:
                    raise ValidationError(
                        f"instance {instance_id} absent at frame {frame_index}"
                    )
                v = obj.approach_velocity(frame_index, frame_period_s)
                return (pos[0], pos[1], v)
        raise ValidationError(f"no instance with id {instance_id}")

    def to_dict(self) -> dict:
        return {
            "radar": dict(self.radar_overrides),
            "objects": [
                {
                    "id": o.instance_id,
                    "category": o.category,
                    "amplitude": o.reflectivity_amplitude,
                    "trajectory": [
                        None if p is None else [float(p[0]), float(p[1])]
                        for p in o.trajectory
                    ],
                }
                for o in self.objects
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scene":
        try:
            objects = [
                SceneObject(
                    instance_id=int(entry["id"]),
                    category=entry["category"],
                    trajectory=list(entry["trajectory"]),
                    reflectivity_amplitude=float(entry.get("amplitude", 1.0)),
                )
                for entry in data.get("objects", [])
            ]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed scene object entry: {exc}") from exc
        return cls(objects=objects, radar_overrides=dict(data.get("radar", {})))


def load_scene(path) -> Scene:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return Scene.from_dict(data)


def save_scene(scene: Scene, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
