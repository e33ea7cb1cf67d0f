"""Pipeline configuration and the stage drivers behind the CLI.

Every stage reads its inputs from the sequence store and writes its
outputs back, so the stages compose either as one call
(:func:`run_pipeline`) or as separate processes with identical results.
Randomness flows from ``root_seed`` split per (stage, frame, instance).
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .annotate import (
    AnnotatorConfig,
    ClusteringConfig,
    annotate_track,
    track_sequence,
)
from .cfar import CfarParams, cfar_detect
from .cloud import to_doa_cloud
from .config import RadarConfig
from .errors import (
    ParseError,
    PointOutOfBounds,
    SeedAssociationFailed,
    ValidationError,
)
from .geometry import build_feature_points, load_camera, load_detections
from .metrics import CLASS_NAMES, NUM_CLASSES, build_report, class_id, confusion
from .scene import Scene, load_scene, save_scene
from .seeding import derive_seed
from .storage import SequenceStore, dump_json, load_json
from .synth import RadarFrame, process_cube, synthesize_frame

THREADS_ENV = "RADAR_ANNOTATE_THREADS"


@dataclass
class PipelineConfig:
    """All stage defaults in one serializable bundle."""

    radar: RadarConfig = field(default_factory=RadarConfig)
    cfar: CfarParams = field(default_factory=CfarParams)
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    annotator: AnnotatorConfig = field(default_factory=AnnotatorConfig)
    noise_sigma: float = 0.0
    root_seed: int = 0
    calibration_path: str | None = None

    def to_dict(self) -> dict:
        return {
            "radar": self.radar.to_dict(),
            "cfar": {
                "train_cells": self.cfar.train_cells,
                "guard_cells": self.cfar.guard_cells,
                "probability_false_alarm": self.cfar.probability_false_alarm,
            },
            "clustering": {
                "bandwidth_grid": [float(v) for v in self.clustering.bandwidth_grid],
                "scales": list(self.clustering.scales),
                "tol": self.clustering.tol,
                "max_iter": self.clustering.max_iter,
                "mc_samples": self.clustering.mc_samples,
            },
            "annotator": {
                "dilation_radius_bins": self.annotator.dilation_radius_bins,
                "max_lost_frames": self.annotator.max_lost_frames,
                "association_max_distance": self.annotator.association_max_distance,
            },
            "noise_sigma": self.noise_sigma,
            "root_seed": self.root_seed,
            "calibration_path": self.calibration_path,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {
            "radar", "cfar", "clustering", "annotator",
            "noise_sigma", "root_seed", "calibration_path",
        }
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config sections: {sorted(unknown)}")
        clustering = dict(data.get("clustering", {}))
        if "bandwidth_grid" in clustering:
            clustering["bandwidth_grid"] = np.asarray(clustering["bandwidth_grid"], dtype=np.float64)
        if "scales" in clustering:
            clustering["scales"] = tuple(clustering["scales"])
        return cls(
            radar=RadarConfig.from_dict(data.get("radar", {})),
            cfar=CfarParams(**data.get("cfar", {})),
            clustering=ClusteringConfig(**clustering),
            annotator=AnnotatorConfig(**data.get("annotator", {})),
            noise_sigma=float(data.get("noise_sigma", 0.0)),
            root_seed=int(data.get("root_seed", 0)),
            calibration_path=data.get("calibration_path"),
        )


def load_config(path) -> PipelineConfig:
    """Parse and validate a pipeline config file.

    An empty file (or empty object) yields the default profile. A
    configured calibration path must exist.
    """
    text = Path(path).read_text(encoding="utf-8").strip()
    data = load_json(path) if text else {}
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    cfg = PipelineConfig.from_dict(data)
    if cfg.noise_sigma < 0:
        raise ValidationError("noise_sigma must be >= 0")
    if cfg.calibration_path and not Path(cfg.calibration_path).exists():
        raise ValidationError(f"calibration_path {cfg.calibration_path} does not exist")
    return cfg


def save_config(cfg: PipelineConfig, path):
    dump_json(cfg.to_dict(), path)


def _num_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _map_frames(func, items):
    """Apply per-frame work, optionally across a thread pool; results are
    returned in input order so writes stay deterministic."""
    threads = _num_threads()
    items = list(items)
    if threads == 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def simulate_stage(store: SequenceStore, scene: Scene, cfg: PipelineConfig) -> list:
    """Synthesize raw IF cubes for every scene frame."""
    radar = cfg.radar
    scene.validate_ranges(radar)
    save_scene(scene, store.scene_path)

    def work(frame_index):
        frame = synthesize_frame(
            scene, frame_index, radar,
            noise_sigma=cfg.noise_sigma,
            rng_seed=derive_seed(cfg.root_seed, "synthesize", frame_index),
        )
        store.save_cube(frame_index, frame.raw_cube, radar)
        return frame_index

    return _map_frames(work, range(scene.num_frames))


def process_stage(store: SequenceStore, cfg: PipelineConfig) -> list:
    """3D-FFT every stored cube into its range-Doppler / range-angle maps."""
    radar = cfg.radar

    def work(frame_index):
        cube, meta = store.load_cube(frame_index)
        frame = RadarFrame(
            frame_index=frame_index,
            timestamp_s=meta.get("timestamp_s", frame_index * radar.frame_period_s),
            raw_cube=cube,
        )
        process_cube(frame, radar)
        store.save_maps(frame_index, frame.rd_map, frame.ra_map, radar)
        return frame_index

    return _map_frames(work, store.frame_indices("cube"))


def detect_stage(store: SequenceStore, cfg: PipelineConfig) -> list:
    """CFAR the range-angle maps and checkpoint the DoA-Doppler clouds.

    Detection runs on squared magnitudes (square-law power), for which
    the cell-averaging threshold is calibrated.
    """
    radar = cfg.radar

    def work(frame_index):
        rd_map, _ = store.load_map("rd", frame_index)
        ra_map, _ = store.load_map("ra", frame_index)
        power = ra_map.astype(np.float64) ** 2
        detections = cfar_detect(power, cfg.cfar)
        return to_doa_cloud(detections, rd_map, radar, frame_index=frame_index)

    clouds = _map_frames(work, store.frame_indices("rd"))
    store.write_detections(clouds)
    return clouds


def _clouds_by_frame(store: SequenceStore) -> list:
    clouds = store.read_detections()
    if not clouds:
        return []
    n = max(c.frame_index for c in clouds) + 1
    by_frame = [None] * n
    for c in clouds:
        by_frame[c.frame_index] = c
    return by_frame


def _seeds_from_scene(scene: Scene, seeds, frame_period_s):
    """(frame, instance) pairs to (seed point, category) from ground truth."""
    resolved = []
    for frame_index, instance_id in seeds:
        state = scene.ground_truth_state(instance_id, frame_index, frame_period_s)
        category = next(
            o.category for o in scene.objects if o.instance_id == instance_id
        )
        resolved.append((frame_index, instance_id, np.asarray(state), category))
    return resolved


def _seeds_from_detections(cfg: PipelineConfig, detections_path):
    """One seed per instance at its middle detected frame."""
    if not cfg.calibration_path:
        raise ValidationError(
            "from-detections seeding requires a camera calibration; "
            "calibration_path is not set"
        )
    if not Path(cfg.calibration_path).exists():
        raise ValidationError(f"calibration_path {cfg.calibration_path} does not exist")
    camera = load_camera(cfg.calibration_path)
    dets = load_detections(detections_path)
    features = build_feature_points(dets, camera, cfg.radar.frame_period_s)
    by_instance = {}
    for fp in features:
        by_instance.setdefault(fp.instance_id, []).append(fp)
    resolved = []
    for instance_id in sorted(by_instance):
        fps = sorted(by_instance[instance_id], key=lambda f: f.frame_index)
        mid = fps[len(fps) // 2]
        resolved.append((mid.frame_index, instance_id, mid.as_seed(), mid.category))
    return resolved


def annotate_stage(store: SequenceStore, cfg: PipelineConfig, seeds=None,
                   detections_path=None) -> dict:
    """Track every seeded instance and write the annotation records.

    ``seeds`` is a list of (frame, instance) pairs resolved against the
    stored scene's ground truth; alternatively ``detections_path`` seeds
    from ingested vision detections. Returns {instance_id: Track or None}.
    """
    clouds = _clouds_by_frame(store)
    if detections_path is not None:
        resolved = _seeds_from_detections(cfg, detections_path)
    else:
        scene = load_scene(store.scene_path)
        resolved = _seeds_from_scene(scene, seeds or [], cfg.radar.frame_period_s)

    tracks = {}
    annotations = []
    for frame_index, instance_id, seed_point, category in resolved:
        try:
            track = track_sequence(
                clouds, frame_index, seed_point,
                clustering=cfg.clustering,
                annotator=cfg.annotator,
                rng_seed=derive_seed(cfg.root_seed, "annotate", instance_id),
                instance_id=instance_id,
                category=category,
            )
        except SeedAssociationFailed:
            tracks[instance_id] = None
            continue
        tracks[instance_id] = track
        annotations.extend(annotate_track(track, cfg.radar, cfg.annotator))

    store.write_annotations(annotations)
    return tracks


@dataclass
class PipelineResult:
    store: SequenceStore
    tracks: dict

    @property
    def ok(self) -> bool:
        return all(t is not None for t in self.tracks.values())


def run_pipeline(cfg: PipelineConfig, seq_dir, scene: Scene, seeds,
                 detections_path=None) -> PipelineResult:
    """synthesize -> process -> detect -> cloud -> annotate, end to end.

    Re-running with the same config and seeds overwrites the store with
    byte-identical content.
    """
    store = SequenceStore(seq_dir, create=True)
    simulate_stage(store, scene, cfg)
    process_stage(store, cfg)
    detect_stage(store, cfg)
    tracks = annotate_stage(store, cfg, seeds=seeds, detections_path=detections_path)
    export_report(store)
    return PipelineResult(store=store, tracks=tracks)


def export_report(store: SequenceStore) -> dict:
    """Sequence summary: frame, instance and annotated-frame counts."""
    frames = store.frame_indices("rd") or store.frame_indices("cube")
    annotations = (
        store.read_annotations() if store.annotations_path.exists() else []
    )
    instances = sorted({a.instance_id for a in annotations})
    annotated_frames = sorted({a.frame_index for a in annotations})
    report = {
        "num_frames": len(frames),
        "num_instances": len(instances),
        "num_annotated_frames": len(annotated_frames),
        "instances": instances,
        "annotations_per_instance": {
            str(i): sum(1 for a in annotations if a.instance_id == i) for i in instances
        },
    }
    dump_json(report, store.report_path)
    return report


# ---------------------------------------------------------------------------
# Evaluation against stored annotations
# ---------------------------------------------------------------------------

def render_truth_labels(annotations, view: str, dims) -> np.ndarray:
    """Dense truth label map from instance masks; instances are painted
    in id order so overlaps resolve deterministically."""
    labels = np.zeros(dims, dtype=np.uint8)
    for ann in sorted(annotations, key=lambda a: a.instance_id):
        mask = ann.rd_mask if view == "rd" else ann.ra_mask
        labels[mask] = class_id(ann.category)
    return labels


def evaluate(pred_dir, truth_dir, mode: str = "dense", view: str = "rd"):
    """Compare predicted label maps against stored annotations.

    Predictions live in a sequence-store layout under ``pred_dir`` as
    ``labels_<view>_<frame>.bin`` files; the truth is the annotation
    checkpoint of ``truth_dir``. Dense mode scores all four classes over
    every bin; sparse mode scores precision/recall of the object classes
    at the annotated sparse points only.
    """
    if mode not in ("dense", "sparse"):
        raise ValidationError(f"mode must be dense or sparse, got {mode!r}")
    if view not in ("rd", "ra"):
        raise ValidationError(f"view must be rd or ra, got {view!r}")
    pred_store = SequenceStore(pred_dir)
    truth_store = SequenceStore(truth_dir)
    annotations = truth_store.read_annotations()
    by_frame = {}
    for ann in annotations:
        by_frame.setdefault(ann.frame_index, []).append(ann)

    frames = pred_store.frame_indices(f"labels_{view}")
    if not frames:
        raise ValidationError(f"no labels_{view} predictions under {pred_dir}")

    conf = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    for frame_index in frames:
        pred, _ = pred_store.load_labels(view, frame_index)
        anns = by_frame.get(frame_index, [])
        if mode == "dense":
            truth = render_truth_labels(anns, view, pred.shape)
            conf += confusion(pred, truth)
        else:
            for ann in anns:
                sparse = ann.rd_sparse if view == "rd" else ann.ra_sparse
                label = class_id(ann.category)
                for row, col in sparse:
                    if not (0 <= row < pred.shape[0] and 0 <= col < pred.shape[1]):
                        raise PointOutOfBounds(
                            f"sparse point ({row}, {col}) outside prediction {pred.shape}"
                        )
                    conf[label, pred[row, col]] += 1

    if mode == "dense":
        report = build_report(conf)
    else:
        object_names = tuple(CLASS_NAMES[k] for k in (1, 2, 3))
        report = build_report(conf, classes=object_names, metrics=("pp", "pr"))
    return report, {"frames_evaluated": len(frames), "mode": mode, "view": view}
