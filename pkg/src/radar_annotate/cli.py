"""Command-line pipeline driver.

Subcommands mirror the pipeline stages::

    radar-annotate simulate --config c.json --scene s.json --seq DIR
    radar-annotate process  --seq DIR
    radar-annotate detect   --seq DIR [--cfar-pfa P --cfar-train N --cfar-guard N]
    radar-annotate annotate --seq DIR --seed-frame N --seed-instance K
    radar-annotate eval     --pred DIR --truth DIR --mode dense|sparse [--view rd|ra]
    radar-annotate report   --seq DIR

``RADAR_ANNOTATE_THREADS`` caps frame-level parallelism;
``RADAR_ANNOTATE_NUMBA=0`` selects the pure-numpy kernels.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import pipeline
from .errors import RadarAnnotateError
from .metrics import format_table
from .scene import load_scene
from .storage import SequenceStore, dump_json


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radar-annotate",
        description="Synthesize radar sequences and annotate object signatures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seq_required=True):
        p.add_argument("--config", help="pipeline config JSON (defaults when omitted)")
        p.add_argument("--seq", required=seq_required, help="sequence directory")
        p.add_argument("--seed", type=int, help="override the root seed")

    p = sub.add_parser("simulate", help="synthesize raw IF cubes from a scenario")
    add_common(p)
    p.add_argument("--scene", required=True, help="scenario JSON file")

    p = sub.add_parser("process", help="FFT stored cubes into RD/RA maps")
    add_common(p)

    p = sub.add_parser("detect", help="CFAR maps into DoA-Doppler clouds")
    add_common(p)
    p.add_argument("--cfar-pfa", type=float, help="CFAR false-alarm probability")
    p.add_argument("--cfar-train", type=int, help="CFAR training cells per axis")
    p.add_argument("--cfar-guard", type=int, help="CFAR guard cells per axis")

    p = sub.add_parser("annotate", help="track seeded instances and emit annotations")
    add_common(p)
    p.add_argument("--scene", help="scenario JSON (defaults to the stored scene)")
    p.add_argument("--seed-frame", type=int, help="seeding frame index")
    p.add_argument("--seed-instance", type=int, help="seeded instance id")
    p.add_argument(
        "--seed-pair", action="append", default=[], metavar="FRAME:ID",
        help="additional (frame, instance) seed; repeatable",
    )
    p.add_argument(
        "--from-detections", metavar="JSONL",
        help="seed every instance from ingested vision detections",
    )
    p.add_argument("--calib", help="camera calibration JSON for --from-detections")
    p.add_argument(
        "--bandwidth-grid", metavar="V1,V2,...",
        help="comma-separated bandwidth grid in normalized units",
    )
    p.add_argument("--mc-samples", type=int, help="Monte-Carlo samples per JS estimate")

    p = sub.add_parser("eval", help="score predicted label maps against annotations")
    p.add_argument("--pred", required=True, help="directory of predicted label maps")
    p.add_argument("--truth", required=True, help="sequence directory with annotations")
    p.add_argument("--mode", choices=("dense", "sparse"), default="dense")
    p.add_argument("--view", choices=("rd", "ra"), default="rd")
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("report", help="summarize a sequence store")
    add_common(p)

    return parser


def _load_config(args) -> pipeline.PipelineConfig:
    cfg = pipeline.load_config(args.config) if args.config else pipeline.PipelineConfig()
    if getattr(args, "seed", None) is not None:
        cfg.root_seed = args.seed
    return cfg


def _parse_seed_pairs(args) -> list:
    seeds = []
    if args.seed_frame is not None or args.seed_instance is not None:
        if args.seed_frame is None or args.seed_instance is None:
            raise RadarAnnotateError("--seed-frame and --seed-instance go together")
        seeds.append((args.seed_frame, args.seed_instance))
    for pair in args.seed_pair:
        try:
            frame, instance = pair.split(":")
            seeds.append((int(frame), int(instance)))
        except ValueError:
            raise RadarAnnotateError(f"bad --seed-pair {pair!r}, expected FRAME:ID") from None
    return seeds


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except RadarAnnotateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "simulate":
        cfg = _load_config(args)
        store = SequenceStore(args.seq, create=True)
        scene = load_scene(args.scene)
        frames = pipeline.simulate_stage(store, scene, cfg)
        print(f"synthesized {len(frames)} frame(s) into {store.root}")
        return 0

    if args.command == "process":
        cfg = _load_config(args)
        store = SequenceStore(args.seq)
        frames = pipeline.process_stage(store, cfg)
        print(f"processed {len(frames)} frame(s)")
        return 0

    if args.command == "detect":
        cfg = _load_config(args)
        if args.cfar_pfa is not None:
            cfg.cfar.probability_false_alarm = args.cfar_pfa
        if args.cfar_train is not None:
            cfg.cfar.train_cells = args.cfar_train
        if args.cfar_guard is not None:
            cfg.cfar.guard_cells = args.cfar_guard
        cfg.cfar.__post_init__()
        store = SequenceStore(args.seq)
        clouds = pipeline.detect_stage(store, cfg)
        total = sum(len(c) for c in clouds)
        print(f"detected {total} point(s) over {len(clouds)} frame(s)")
        return 0

    if args.command == "annotate":
        cfg = _load_config(args)
        if args.calib:
            cfg.calibration_path = args.calib
        if args.bandwidth_grid:
            cfg.clustering.bandwidth_grid = np.asarray(
                [float(v) for v in args.bandwidth_grid.split(",")], dtype=np.float64
            )
        if args.mc_samples is not None:
            cfg.clustering.mc_samples = args.mc_samples
        store = SequenceStore(args.seq)
        if args.scene:
            scene_path = Path(args.scene)
            if scene_path.resolve() != store.scene_path.resolve():
                store.scene_path.write_text(scene_path.read_text(encoding="utf-8"),
                                            encoding="utf-8")
        seeds = _parse_seed_pairs(args)
        if args.from_detections:
            tracks = pipeline.annotate_stage(
                store, cfg, detections_path=args.from_detections
            )
        else:
            if not seeds:
                raise RadarAnnotateError(
                    "annotate needs --seed-frame/--seed-instance, --seed-pair, "
                    "or --from-detections"
                )
            tracks = pipeline.annotate_stage(store, cfg, seeds=seeds)
        pipeline.export_report(store)
        failed = sorted(i for i, t in tracks.items() if t is None)
        for instance_id, track in sorted(tracks.items()):
            if track is None:
                print(f"instance {instance_id}: seed association failed")
            else:
                print(f"instance {instance_id}: {len(track.annotated_frames)} annotated frame(s)")
        return 1 if failed else 0

    if args.command == "eval":
        report, info = pipeline.evaluate(args.pred, args.truth,
                                         mode=args.mode, view=args.view)
        payload = {"info": info, "report": report.to_dict()}
        out = Path(args.out) if args.out else Path(args.pred) / f"metrics_{args.view}_{args.mode}.json"
        dump_json(payload, out)
        print(format_table(report))
        print(f"report written to {out}")
        return 0

    if args.command == "report":
        store = SequenceStore(args.seq)
        report = pipeline.export_report(store)
        print(json.dumps(report, sort_keys=True, indent=2))
        return 0

    raise RadarAnnotateError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
