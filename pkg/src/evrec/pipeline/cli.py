"""Command-line interface.

Subcommands: simulate, encode, reconstruct, evaluate, fwl, plus
make-weights for producing weight files without a training stage.
Exit codes: 0 success, 2 input-format error, 3 numeric failure,
4 config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..encode import build_voxel_grid, slice_by_count
from ..errors import ConfigError, EvrecError, InputFormatError, NumericError
from ..events import EventStream
from ..eventsim import emitter, scene as scenemod
from ..eventsim.textures import TextureSpec
from ..metrics import epe as epe_metric
from ..metrics import mse as mse_metric
from ..metrics import outlier_pct, ssim as ssim_metric
from ..sparse.cista import ArchConfig, make_integrator_weights, random_weights
from ..warp import fwl as fwl_metric
from . import config as cfgmod
from . import formats, providers
from .run import RunConfig, run_reconstruction

logger = logging.getLogger("evrec")

FRAME_PATTERN = "frame_{:06d}.png"


def _dump_json(path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _scene_from_args(args, file_cfg: dict) -> scenemod.SceneConfig:
    if "scene" in file_cfg:
        return cfgmod.scene_from_dict(file_cfg["scene"])
    if args.object_count:
        base = scenemod.random_scene(
            args.width, args.height, args.duration, args.object_count, seed=args.seed
        )
        if args.bg_vx is None and args.bg_vy is None:
            return base
        motion = scenemod.AffineMotion(
            vx=args.bg_vx or 0.0, vy=args.bg_vy or 0.0,
            omega=args.bg_omega, scale_rate=args.bg_scale_rate,
        )
        return scenemod.SceneConfig(
            width=base.width, height=base.height, duration=base.duration,
            background=base.background, background_motion=motion, objects=base.objects,
        )
    texture = TextureSpec(
        kind=args.bg_texture, seed=args.bg_seed, scale=args.bg_scale,
        path=args.bg_image,
    )
    motion = scenemod.AffineMotion(
        vx=args.bg_vx or 0.0, vy=args.bg_vy or 0.0,
        omega=args.bg_omega, scale_rate=args.bg_scale_rate,
    )
    return scenemod.SceneConfig(
        width=args.width, height=args.height, duration=args.duration,
        background=texture, background_motion=motion,
    )


def _sim_params_from_args(args, file_cfg: dict) -> emitter.SimParams:
    base = dict(file_cfg.get("sim", {}))
    for key, flag in (
        ("threshold_mean", args.threshold_mean),
        ("threshold_std", args.threshold_std),
        ("neg_pos_ratio_mean", args.ratio_mean),
        ("neg_pos_ratio_std", args.ratio_std),
        ("cutoff_hz", args.cutoff_hz),
        ("refractory_s", args.refractory_s),
        ("leak_rate_hz", args.leak_rate_hz),
        ("shot_noise_hz", args.shot_noise_hz),
    ):
        if flag is not None:
            base[key] = flag
    return cfgmod.sim_params_from_dict(base, seed=args.seed)


def cmd_simulate(args, file_cfg: dict) -> int:
    scene = _scene_from_args(args, file_cfg)
    params = _sim_params_from_args(args, file_cfg)
    frames, times = scenemod.render_sequence(scene)
    logger.info("rendered %d frames over %.3fs", len(frames), scene.duration)
    events = emitter.emit_events(frames, times, params)
    logger.info("emitted %d events", len(events))

    formats.write_events(args.out_events, events, fmt=args.events_format)
    if args.out_frames_dir:
        outdir = Path(args.out_frames_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        entries = []
        for i, (frame, t) in enumerate(zip(frames, times)):
            name = FRAME_PATTERN.format(i)
            formats.write_image(outdir / name, frame)
            entries.append({"file": name, "t": t})
        formats.write_manifest(outdir / "manifest.json", entries, "frames")
    if args.out_flow_dir:
        outdir = Path(args.out_flow_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        entries = []
        for i in range(len(times) - 1):
            flow = scenemod.ground_truth_flow(scene, times[i], times[i + 1])
            name = providers.FLOW_FILE_PATTERN.format(i)
            formats.write_flo(outdir / name, flow)
            entries.append({"file": name, "t0": times[i], "t1": times[i + 1]})
        formats.write_manifest(outdir / "manifest.json", entries, "flows")
    return 0


def cmd_encode(args, file_cfg: dict) -> int:
    events = formats.read_events(args.events)
    groups = slice_by_count(events, args.n_events)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, group in enumerate(groups):
        grid = build_voxel_grid(group.events, args.bins, normalize=args.normalize)
        name = f"voxels_{i:06d}.tns"
        formats.write_tensors(
            outdir / name,
            {"voxels": grid.data, "window": np.array([grid.t_start, grid.t_end])},
        )
        entries.append({"file": name, "n_events": len(group.events), "partial": group.partial})
        if group.partial:
            logger.warning("group %d is partial (%d events)", i, len(group.events))
    formats.write_manifest(outdir / "manifest.json", entries, "groups")
    return 0


def cmd_reconstruct(args, file_cfg: dict) -> int:
    events = formats.read_events(args.events)
    weights = formats.read_weights(args.weights)
    cfg = cfgmod.run_config_from_dict(
        file_cfg.get("run", {}),
        bins=weights.arch.bins,
        n_events=args.n_events,
        warp_mode=args.warp_mode,
        emit_initial=args.emit_initial or None,
        timings=args.timings or None,
        seed=args.seed,
    )
    scene = cfgmod.load_scene(args.scene) if args.scene else None
    provider = providers.make_provider(args.flow, scene=scene, directory=args.flow_dir)

    gt_frames = None
    if args.gt_frames_dir:
        gtdir = Path(args.gt_frames_dir)
        entries = formats.read_manifest(gtdir / "manifest.json", "frames")
        gt_frames = [(e["t"], formats.read_image(gtdir / e["file"])) for e in entries]
    gt_flow_provider = providers.SceneFlowProvider(scene) if scene is not None else None

    frames, flows, report = run_reconstruction(
        events, cfg, provider, weights, gt_frames=gt_frames, gt_flow_provider=gt_flow_provider
    )

    if args.out_frames_dir:
        outdir = Path(args.out_frames_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        entries = []
        offset = 1 if cfg.emit_initial else 0
        for i, frame in enumerate(frames):
            name = FRAME_PATTERN.format(i)
            formats.write_image(outdir / name, frame)
            step = report["steps"][i - offset] if i >= offset and report["steps"] else None
            entries.append({"file": name, "t": step["t_end"] if step else events.t_start})
        formats.write_manifest(outdir / "manifest.json", entries, "frames")
    if args.out_flow_dir:
        outdir = Path(args.out_flow_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        entries = []
        for i, flow in enumerate(flows):
            name = providers.FLOW_FILE_PATTERN.format(i)
            formats.write_flo(outdir / name, flow)
            step = report["steps"][i]
            entries.append({"file": name, "t0": step["t_start"], "t1": step["t_end"]})
        formats.write_manifest(outdir / "manifest.json", entries, "flows")
    if args.report:
        _dump_json(args.report, report)
    means = report.get("means", {})
    logger.info("reconstructed %d frames; means: %s", len(frames), means)
    return 0


def _match_by_time(pred_entries, gt_entries):
    pairs = []
    for pe in pred_entries:
        ge = min(gt_entries, key=lambda e: abs(e["t"] - pe["t"]))
        pairs.append((pe, ge))
    return pairs


def cmd_evaluate(args, file_cfg: dict) -> int:
    rows = []
    if args.pred_dir and args.gt_dir:
        pred_dir, gt_dir = Path(args.pred_dir), Path(args.gt_dir)
        pred_entries = formats.read_manifest(pred_dir / "manifest.json", "frames")
        gt_entries = formats.read_manifest(gt_dir / "manifest.json", "frames")
        for i, (pe, ge) in enumerate(_match_by_time(pred_entries, gt_entries)):
            pred = formats.read_image(pred_dir / pe["file"])
            ref = formats.read_image(gt_dir / ge["file"])
            if args.normalize_gt:
                ref = formats.normalize_frame(ref)
            rows.append(
                {"index": i, "pred": pe["file"], "gt": ge["file"],
                 "mse": mse_metric(pred, ref), "ssim": ssim_metric(pred, ref)}
            )
    flow_rows = []
    if args.flow_pred_dir and args.flow_gt_dir:
        pdir, gdir = Path(args.flow_pred_dir), Path(args.flow_gt_dir)
        pentries = formats.read_manifest(pdir / "manifest.json", "flows")
        events = formats.read_events(args.events) if args.events else None
        for i, pe in enumerate(pentries):
            pred = formats.read_flo(pdir / pe["file"])
            gpath = gdir / pe["file"]
            if not gpath.exists():
                raise InputFormatError(f"no reference flow {gpath}")
            ref = formats.read_flo(gpath)
            row = {"index": i, "file": pe["file"], "epe": epe_metric(pred, ref),
                   "out_pct": outlier_pct(pred, ref)}
            if events is not None and "t0" in pe:
                lo = np.searchsorted(events.ts, pe["t0"], side="left")
                hi = np.searchsorted(events.ts, pe["t1"], side="right")
                sub = EventStream(
                    events.xs[lo:hi], events.ys[lo:hi], events.ts[lo:hi], events.ps[lo:hi],
                    events.width, events.height, pe["t0"], pe["t1"],
                )
                try:
                    row["fwl"] = fwl_metric(sub, pred, pe["t1"]) if len(sub) else None
                except NumericError:
                    row["fwl"] = None
            flow_rows.append(row)

    def mean_of(rows_, key):
        vals = [r[key] for r in rows_ if r.get(key) is not None]
        return float(np.mean(vals)) if vals else None

    payload = {
        "frames": rows,
        "flows": flow_rows,
        "means": {
            "mse": mean_of(rows, "mse"),
            "ssim": mean_of(rows, "ssim"),
            "epe": mean_of(flow_rows, "epe"),
            "out_pct": mean_of(flow_rows, "out_pct"),
            "fwl": mean_of(flow_rows, "fwl"),
        },
    }
    if args.report:
        if str(args.report).endswith(".csv"):
            _write_csv(args.report, rows, flow_rows)
        else:
            _dump_json(args.report, payload)
    print(json.dumps(payload["means"], sort_keys=True))
    return 0


def _write_csv(path, rows, flow_rows):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "index", "file", "mse", "ssim", "epe", "out_pct", "fwl"])
        for r in rows:
            writer.writerow(["frame", r["index"], r["pred"], r["mse"], r["ssim"], "", "", ""])
        for r in flow_rows:
            writer.writerow(
                ["flow", r["index"], r["file"], "", "", r["epe"], r["out_pct"], r.get("fwl", "")]
            )


def cmd_fwl(args, file_cfg: dict) -> int:
    events = formats.read_events(args.events)
    flow = formats.read_flo(args.flow)
    t_ref = args.t_ref if args.t_ref is not None else events.t_end
    value = fwl_metric(events, flow, t_ref)
    if args.out_warped or args.out_unwarped:
        from ..warp import FlowField, warp_events

        if args.out_warped:
            img = warp_events(events, flow, t_ref)
            formats.write_image(args.out_warped, formats.normalize_frame(img))
        if args.out_unwarped:
            img = warp_events(events, FlowField.zero(events.height, events.width), t_ref)
            formats.write_image(args.out_unwarped, formats.normalize_frame(img))
    print(f"{value:.6f}")
    return 0


def cmd_make_weights(args, file_cfg: dict) -> int:
    if args.kind == "integrator":
        weights, _ = make_integrator_weights(
            bins=args.bins, threshold_mean=args.threshold_mean, iterations=args.iterations
        )
    else:
        arch = ArchConfig(
            bins=args.bins, feature_channels=args.feature_channels,
            code_channels=args.code_channels, num_blocks=args.iterations,
        )
        weights = random_weights(arch, seed=args.seed)
    formats.write_weights(args.out, weights)
    logger.info("wrote %s weights to %s", args.kind, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evrec", description=__doc__)
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    parser.add_argument("--config", type=str, default=None, help="TOML or JSON config file")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="render a scene and emit events")
    p.add_argument("--out-events", required=True)
    p.add_argument("--events-format", choices=("binary", "text"), default="binary")
    p.add_argument("--out-frames-dir")
    p.add_argument("--out-flow-dir")
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--duration", type=float, default=0.25)
    p.add_argument("--object-count", type=int, default=0)
    p.add_argument("--bg-texture", choices=("checker", "noise", "bars", "image"), default="checker")
    p.add_argument("--bg-scale", type=float, default=8.0)
    p.add_argument("--bg-seed", type=int, default=0)
    p.add_argument("--bg-image", type=str, default=None)
    p.add_argument("--bg-vx", type=float, default=None)
    p.add_argument("--bg-vy", type=float, default=None)
    p.add_argument("--bg-omega", type=float, default=0.0)
    p.add_argument("--bg-scale-rate", type=float, default=0.0)
    p.add_argument("--threshold-mean", type=float, default=None)
    p.add_argument("--threshold-std", type=float, default=None)
    p.add_argument("--ratio-mean", type=float, default=None)
    p.add_argument("--ratio-std", type=float, default=None)
    p.add_argument("--cutoff-hz", type=float, default=None)
    p.add_argument("--refractory-s", type=float, default=None)
    p.add_argument("--leak-rate-hz", type=float, default=None)
    p.add_argument("--shot-noise-hz", type=float, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("encode", help="voxelize an event file into groups")
    p.add_argument("--events", required=True)
    p.add_argument("--bins", type=int, default=5)
    p.add_argument("--n-events", type=int, default=15000)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("reconstruct", help="run the recursive reconstruction loop")
    p.add_argument("--events", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--n-events", type=int, default=None)
    p.add_argument("--flow", choices=("zero", "gt", "external"), default="zero")
    p.add_argument("--flow-dir", help="directory of flow_NNNNNN.flo for --flow external")
    p.add_argument("--scene", help="scene config file for --flow gt")
    p.add_argument("--warp-mode", choices=("none", "frame", "frame+codes"), default=None)
    p.add_argument("--emit-initial", action="store_true")
    p.add_argument("--timings", action="store_true", help="include wall_ms in the report")
    p.add_argument("--gt-frames-dir", help="reference frames for per-step MSE/SSIM")
    p.add_argument("--out-frames-dir")
    p.add_argument("--out-flow-dir")
    p.add_argument("--report")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="compare outputs against references")
    p.add_argument("--pred-dir")
    p.add_argument("--gt-dir")
    p.add_argument("--normalize-gt", action="store_true", help="rescale references to [0,1]")
    p.add_argument("--flow-pred-dir")
    p.add_argument("--flow-gt-dir")
    p.add_argument("--events", help="event file enabling FWL on predicted flow")
    p.add_argument("--report")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("fwl", help="forward-warping loss of a flow on an event file")
    p.add_argument("--events", required=True)
    p.add_argument("--flow", required=True)
    p.add_argument("--t-ref", type=float, default=None)
    p.add_argument("--out-warped")
    p.add_argument("--out-unwarped")
    p.set_defaults(func=cmd_fwl)

    p = sub.add_parser("make-weights", help="write a weight container file")
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=("integrator", "random"), default="integrator")
    p.add_argument("--bins", type=int, default=5)
    p.add_argument("--threshold-mean", type=float, default=0.3)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--feature-channels", type=int, default=16)
    p.add_argument("--code-channels", type=int, default=32)
    p.set_defaults(func=cmd_make_weights)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    file_cfg = cfgmod.load_config_file(args.config) if args.config else {}
    try:
        return args.func(args, file_cfg)
    except InputFormatError as exc:
        logger.error("input format error: %s", exc)
        return 2
    except FileNotFoundError as exc:
        logger.error("missing file: %s", exc)
        return 2
    except NumericError as exc:
        logger.error("numeric failure: %s", exc)
        return 3
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        return 4
    except EvrecError as exc:
        logger.error("%s", exc)
        return 4


if __name__ == "__main__":
    sys.exit(main())
