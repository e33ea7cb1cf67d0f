"""Sequence persistence: binary maps with JSON sidecars, JSON-lines checkpoints.

Map and cube binaries are raw little-endian row-major arrays; the
sidecar (same path plus ``.json``) records dims, axis names, resolutions
and frame timing. All JSON is written with sorted keys so re-runs under
the same seeds are byte-identical.

Sequence directory layout::

    <seq>/
      scene.json
      frames/cube_00000.bin(.json)   raw IF cubes, complex64
      frames/rd_00000.bin(.json)     range-Doppler magnitudes, float32
      frames/ra_00000.bin(.json)     range-angle magnitudes, float32
      detections.jsonl               DoA-Doppler cloud per frame
      annotations.jsonl              one record per frame per instance
      report.json
"""

import json
import os
import re
from pathlib import Path

import numpy as np

from .annotate import Annotation
from .cloud import DoaCloud
from .config import RadarConfig
from .errors import ParseError, ValidationError

_FRAME_RE = re.compile(r"^(cube|rd|ra|labels_rd|labels_ra)_(\d{5})\.bin$")


def dump_json(obj, path, indent: int | None = 2):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=indent)
        fh.write("\n")


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc


def write_array(path, arr: np.ndarray, meta: dict, dtype: str):
    """Raw row-major binary plus sidecar; dtype is a little-endian numpy code."""
    arr = np.ascontiguousarray(arr)
    with open(path, "wb") as fh:
        fh.write(arr.astype(dtype).tobytes())
    sidecar = dict(meta)
    sidecar["dims"] = list(arr.shape)
    sidecar["dtype"] = dtype
    dump_json(sidecar, str(path) + ".json")


def read_array(path):
    meta = load_json(str(path) + ".json")
    with open(path, "rb") as fh:
        raw = fh.read()
    arr = np.frombuffer(raw, dtype=meta["dtype"]).reshape(meta["dims"])
    return arr, meta


def map_sidecar(config: RadarConfig, frame_index: int, axes) -> dict:
    return {
        "axes": list(axes),
        "frame_index": frame_index,
        "timestamp_s": frame_index * config.frame_period_s,
        "range_resolution_m": config.range_resolution_m,
        "velocity_resolution_mps": config.velocity_resolution_mps,
    }


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def read_jsonl(path):
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc.msg}") from exc
    return records


class SequenceStore:
    """Paths and typed read/write helpers for one sequence directory."""

    def __init__(self, root, create: bool = False):
        self.root = Path(root)
        if create:
            (self.root / "frames").mkdir(parents=True, exist_ok=True)
        elif not self.root.is_dir():
            raise ValidationError(f"sequence directory {self.root} does not exist")

    # --- paths ---

    @property
    def frames_dir(self) -> Path:
        return self.root / "frames"

    @property
    def scene_path(self) -> Path:
        return self.root / "scene.json"

    @property
    def detections_path(self) -> Path:
        return self.root / "detections.jsonl"

    @property
    def annotations_path(self) -> Path:
        return self.root / "annotations.jsonl"

    @property
    def report_path(self) -> Path:
        return self.root / "report.json"

    def frame_path(self, kind: str, frame_index: int) -> Path:
        return self.frames_dir / f"{kind}_{frame_index:05d}.bin"

    def frame_indices(self, kind: str = "rd") -> list:
        out = []
        if self.frames_dir.is_dir():
            for name in os.listdir(self.frames_dir):
                m = _FRAME_RE.match(name)
                if m and m.group(1) == kind:
                    out.append(int(m.group(2)))
        return sorted(out)

    # --- cubes and maps ---

    def save_cube(self, frame_index: int, cube: np.ndarray, config: RadarConfig):
        meta = map_sidecar(config, frame_index, ("antenna", "chirp", "sample"))
        write_array(self.frame_path("cube", frame_index), cube, meta, "<c8")

    def load_cube(self, frame_index: int):
        return read_array(self.frame_path("cube", frame_index))

    def save_maps(self, frame_index: int, rd_map: np.ndarray, ra_map: np.ndarray,
                  config: RadarConfig):
        write_array(
            self.frame_path("rd", frame_index), rd_map,
            map_sidecar(config, frame_index, ("range", "doppler")), "<f4",
        )
        write_array(
            self.frame_path("ra", frame_index), ra_map,
            map_sidecar(config, frame_index, ("range", "angle")), "<f4",
        )

    def load_map(self, kind: str, frame_index: int):
        return read_array(self.frame_path(kind, frame_index))

    def save_labels(self, view: str, frame_index: int, labels: np.ndarray):
        meta = {"axes": ["range", "doppler" if view == "rd" else "angle"],
                "frame_index": frame_index, "view": view}
        write_array(self.frame_path(f"labels_{view}", frame_index), labels, meta, "<u1")

    def load_labels(self, view: str, frame_index: int):
        return read_array(self.frame_path(f"labels_{view}", frame_index))

    # --- checkpoints ---

    def write_detections(self, clouds):
        write_jsonl(self.detections_path, (c.to_dict() for c in clouds))

    def read_detections(self) -> list:
        return [DoaCloud.from_dict(rec) for rec in read_jsonl(self.detections_path)]

    def write_annotations(self, annotations):
        records = sorted(
            (a.to_dict() for a in annotations),
            key=lambda r: (r["frame"], r["id"]),
        )
        write_jsonl(self.annotations_path, records)

    def read_annotations(self) -> list:
        return [Annotation.from_dict(rec) for rec in read_jsonl(self.annotations_path)]
