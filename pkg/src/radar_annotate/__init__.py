"""FMCW radar scene synthesis and semi-automatic signature annotation.

Synthesizes raw IF data cubes from parametric scenes, processes them
into range-Doppler and range-angle maps, detects reflectors with
cell-averaging CFAR, clusters the resulting DoA-Doppler point cloud
with stability-selected mean-shift bandwidths, tracks seeded instances
across frames, and emits sparse/box/mask annotations in both radar
views together with a segmentation metric suite.
"""

from .accel import HAVE_NUMBA, USE_NUMBA, backend_name
from .annotate import (
    Annotation,
    AnnotatorConfig,
    Association,
    ClusteringConfig,
    Track,
    annotate_track,
    associate_cluster,
    bounding_box,
    build_annotation,
    dense_mask,
    project_ra,
    project_rd,
    track_sequence,
)
from .bandwidth import BandwidthGrid, BandwidthSelection, js_divergence, select_bandwidth
from .cfar import CfarParams, cfar_detect, cfar_threshold
from .cloud import DoaCloud, to_doa_cloud
from .config import RadarConfig
from .geometry import (
    CameraModel,
    FeaturePoint,
    InstanceDetection,
    build_feature_points,
    estimate_velocity,
    load_camera,
    load_detections,
    pixel_to_ground,
    radial_velocity,
    reference_pixel,
)
from .meanshift import Cluster, Gaussian, fit_gaussian, isotropic_gaussian, mean_shift
from .metrics import (
    CLASS_NAMES,
    MetricReport,
    aggregate,
    build_report,
    confusion,
    format_table,
    per_class_metrics,
    sparse_eval,
)
from .pipeline import (
    PipelineConfig,
    PipelineResult,
    annotate_stage,
    detect_stage,
    evaluate,
    export_report,
    load_config,
    process_stage,
    run_pipeline,
    save_config,
    simulate_stage,
)
from .rle import rle_decode, rle_encode
from .scene import Scene, SceneObject, load_scene, save_scene
from .seeding import derive_seed
from .storage import SequenceStore
from .synth import RadarFrame, process_cube, synthesize_frame

__version__ = "0.1.0"
