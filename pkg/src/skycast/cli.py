"""Command-line front end.

Subcommands: ``flow`` (two frames to a flow field plus velocity maps),
``predict`` (extrapolate a sequence), ``evaluate`` (lead-time accuracy
report) and ``synth`` (generate a ground-truth scene).  Options may come
from a flat key=value config file; command-line flags win.

Exit codes: 0 success, 2 invalid input, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from dataclasses import dataclass, fields, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .errors import InvalidInputError
from .flow import FlowParams, pyramid_flow, to_velocity
from .image import Image, ratio_channel
from .io import (
    read_image,
    read_mask,
    write_accuracy_csv,
    write_accuracy_svg,
    write_false_color,
    write_flow,
    write_image,
    write_mask,
)
from .predict import cascade_predict
from .segment import evaluate_sequence, segment
from .synthetic import SceneSpec, generate

log = logging.getLogger(__name__)

_TIMESTAMP_RE = re.compile(r"\d{14}")
_METHOD_ALIASES = {"hs": "horn_schunck", "lk": "lucas_kanade", "clg": "clg"}
_SYNTH_BASE_TIME = datetime(2020, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class RunConfig:
    input_dir: Path | None = None
    pattern: str = "*.png"
    frame_interval: float = 2.0
    max_lead_steps: int = 5
    roi_mask: Path | None = None
    output_dir: Path = Path(".")
    params: FlowParams = FlowParams()


def parse_config_file(path) -> dict:
    """Flat key=value pairs; '#' starts a comment."""
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise InvalidInputError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, value = stripped.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def ingest(input_dir, pattern: str, frame_interval: float = 2.0) -> list:
    """Load timestamped frames, split into runs at gaps > 1.5x the interval.

    Filenames must embed a YYYYMMDDhhmmss UTC timestamp.  Files without one,
    or files that fail to decode, are skipped with a warning.  Returns a list
    of runs; each run is an ordered list of (timestamp, Image, source path).
    """
    input_dir = Path(input_dir)
    paths = sorted(input_dir.glob(pattern))
    if not paths:
        raise InvalidInputError(f"no files matching {pattern!r} in {input_dir}")
    entries = []
    for path in paths:
        match = _TIMESTAMP_RE.search(path.name)
        if not match:
            log.warning("skipping %s: no YYYYMMDDhhmmss timestamp in filename", path)
            continue
        try:
            stamp = datetime.strptime(match.group(), "%Y%m%d%H%M%S").replace(tzinfo=timezone.utc)
        except ValueError:
            log.warning("skipping %s: unparseable timestamp %r", path, match.group())
            continue
        try:
            img = read_image(path)
        except Exception as exc:  # decoder errors vary by format
            log.warning("skipping %s: %s", path, exc)
            continue
        entries.append((stamp, img, path))
    if not entries:
        raise InvalidInputError(f"no readable timestamped frames in {input_dir}")
    entries.sort(key=lambda e: e[0])
    runs = [[entries[0]]]
    limit = timedelta(minutes=1.5 * frame_interval)
    for prev, cur in zip(entries, entries[1:]):
        if cur[0] - prev[0] > limit:
            runs.append([])
        runs[-1].append(cur)
    return runs


def _longest_run(runs: list) -> list:
    best = max(runs, key=len)
    if len(runs) > 1:
        log.warning("%d runs found; using the longest (%d frames)", len(runs), len(best))
    return best


def _load_two_frames(path1, path2) -> tuple[Image, Image]:
    img1 = read_image(path1)
    img2 = read_image(path2)
    if img1.shape != img2.shape:
        raise InvalidInputError(
            f"frame sizes differ: {path1} is {img1.width}x{img1.height}, "
            f"{path2} is {img2.width}x{img2.height}"
        )
    return img1, img2


def _fmt_minutes(x: float) -> str:
    return format(x, ".10g")


def cmd_flow(cfg: RunConfig, frame1, frame2) -> None:
    img1, img2 = _load_two_frames(frame1, frame2)
    flow = pyramid_flow(ratio_channel(img1), ratio_channel(img2), cfg.params)
    velocity = to_velocity(flow, cfg.frame_interval)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_flow(out / "flow.nflo", flow)
    write_false_color(out / "velocity_u.png", velocity.u, label="u_px_per_min")
    write_false_color(out / "velocity_v.png", velocity.v, label="v_px_per_min")
    print(f"wrote {out / 'flow.nflo'} and velocity maps")


def cmd_predict(cfg: RunConfig) -> None:
    if cfg.input_dir is None:
        raise InvalidInputError("predict needs an input directory")
    run = _longest_run(ingest(cfg.input_dir, cfg.pattern, cfg.frame_interval))
    if len(run) < 2:
        raise InvalidInputError(f"prediction needs at least 2 frames, run has {len(run)}")
    (_, prev_img, _), (_, cur_img, cur_path) = run[-2], run[-1]
    forecast = cascade_predict(
        prev_img, cur_img, cfg.max_lead_steps, cfg.params,
        frame_interval=cfg.frame_interval, base_time=run[-1][0],
    )
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    base = cur_path.stem
    for k, frame in enumerate(forecast.frames, start=1):
        lead = _fmt_minutes(k * cfg.frame_interval)
        write_image(out / f"{base}_pred+{lead}min.png", frame)
        write_mask(out / f"{base}_pred+{lead}min_mask.png", segment(frame))
    print(f"wrote {len(forecast.frames)} predictions to {out}")


def cmd_evaluate(cfg: RunConfig) -> None:
    if cfg.input_dir is None:
        raise InvalidInputError("evaluate needs an input directory")
    run = _longest_run(ingest(cfg.input_dir, cfg.pattern, cfg.frame_interval))
    needed = cfg.max_lead_steps + 2
    if len(run) < needed:
        raise InvalidInputError(
            f"evaluation with {cfg.max_lead_steps} lead steps needs at least {needed} frames, "
            f"run has {len(run)}"
        )
    roi = read_mask(cfg.roi_mask) if cfg.roi_mask else None
    report = evaluate_sequence(
        [(stamp, img) for stamp, img, _ in run], cfg.max_lead_steps, cfg.params, roi=roi
    )
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_accuracy_csv(out / "accuracy.csv", report)
    write_accuracy_svg(out / "accuracy.svg", report)
    for row in report.rows:
        print(f"lead {_fmt_minutes(row.lead_minutes)} min: accuracy {row.accuracy:.4f} ({row.n_frames} anchors)")
    print(f"wrote {out / 'accuracy.csv'} and {out / 'accuracy.svg'}")


_SCENE_KEYS = {f.name for f in fields(SceneSpec)}


def _scene_from_config(values: dict) -> SceneSpec:
    kwargs = {}
    for key, raw in values.items():
        if key in ("velocity_x", "velocity_y"):
            continue
        if key not in _SCENE_KEYS:
            raise InvalidInputError(f"unknown scene key {key!r}")
        if key == "velocity":
            raise InvalidInputError("use velocity_x / velocity_y")
        kind = SceneSpec.__dataclass_fields__[key].type
        kwargs[key] = int(raw) if kind == "int" else float(raw)
    vx = float(values.get("velocity_x", 1.0))
    vy = float(values.get("velocity_y", 0.0))
    kwargs["velocity"] = (vx, vy)
    return SceneSpec(**kwargs)


def cmd_synth(cfg: RunConfig, scene: SceneSpec) -> None:
    sequence = generate(scene)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    step = timedelta(minutes=cfg.frame_interval)
    for k, frame in enumerate(sequence.frames):
        stamp = (_SYNTH_BASE_TIME + k * step).strftime("%Y%m%d%H%M%S")
        write_image(out / f"frame_{stamp}.png", frame)
        write_mask(out / f"mask_{stamp}.png", sequence.true_masks[k])
    for k, flow in enumerate(sequence.true_flows):
        write_flow(out / f"true_flow_{k:03d}.nflo", flow)
    print(f"wrote {len(sequence.frames)} frames to {out}")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key=value config file")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--interval", type=float, help="frame interval in minutes")
    parser.add_argument("--steps", type=int, help="number of lead steps")
    parser.add_argument("--method", choices=sorted(_METHOD_ALIASES), help="flow method")
    parser.add_argument("--alpha", type=float, help="smoothness weight")
    parser.add_argument("--window-sigma", type=float, help="local integration scale (px)")
    parser.add_argument("--iterations", type=int, help="solver sweeps per warp")
    parser.add_argument("--pyramid-levels", type=int, help="max pyramid levels (0 = auto)")
    parser.add_argument("--roi", type=Path, help="PNG mask restricting scoring")
    parser.add_argument("--pattern", help="frame filename glob (default *.png)")


def _pick(flag, cfg_values: dict, key: str, convert, default):
    if flag is not None:
        return flag
    if key in cfg_values:
        return convert(cfg_values[key])
    return default


def _build_config(args) -> RunConfig:
    cfg_values = parse_config_file(args.config) if args.config else {}
    method = _pick(args.method, cfg_values, "method", str, "clg")
    method = _METHOD_ALIASES.get(method, method)
    base = FlowParams()
    params = FlowParams(
        method=method,
        alpha=_pick(args.alpha, cfg_values, "alpha", float, base.alpha),
        window_sigma=_pick(args.window_sigma, cfg_values, "window_sigma", float, base.window_sigma),
        iterations=_pick(args.iterations, cfg_values, "iterations", int, base.iterations),
        pyramid_scale=_pick(None, cfg_values, "pyramid_scale", float, base.pyramid_scale),
        pyramid_min_dim=_pick(None, cfg_values, "pyramid_min_dim", int, base.pyramid_min_dim),
        warps_per_level=_pick(None, cfg_values, "warps_per_level", int, base.warps_per_level),
        eigen_threshold=_pick(None, cfg_values, "eigen_threshold", float, base.eigen_threshold),
        max_levels=_pick(args.pyramid_levels, cfg_values, "pyramid_levels", int, base.max_levels),
    )
    params.validate()
    roi = _pick(args.roi, cfg_values, "roi", Path, None)
    cfg = RunConfig(
        input_dir=Path(args.input_dir) if getattr(args, "input_dir", None) else None,
        pattern=_pick(args.pattern, cfg_values, "pattern", str, "*.png"),
        frame_interval=_pick(args.interval, cfg_values, "interval", float, 2.0),
        max_lead_steps=_pick(args.steps, cfg_values, "steps", int, 5),
        roi_mask=Path(roi) if roi else None,
        output_dir=Path(_pick(args.out, cfg_values, "out", Path, Path("."))),
        params=params,
    )
    if cfg.frame_interval <= 0:
        raise InvalidInputError(f"frame interval must be positive, got {cfg.frame_interval}")
    if cfg.max_lead_steps < 1:
        raise InvalidInputError(f"steps must be at least 1, got {cfg.max_lead_steps}")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skycast", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_flow = sub.add_parser("flow", help="estimate flow between two frames")
    p_flow.add_argument("frame1", type=Path)
    p_flow.add_argument("frame2", type=Path)
    _add_common_flags(p_flow)

    p_predict = sub.add_parser("predict", help="extrapolate the latest frames of a sequence")
    p_predict.add_argument("input_dir", type=Path)
    _add_common_flags(p_predict)

    p_eval = sub.add_parser("evaluate", help="score forecasts against observed frames")
    p_eval.add_argument("input_dir", type=Path)
    _add_common_flags(p_eval)

    p_synth = sub.add_parser("synth", help="generate a synthetic ground-truth scene")
    _add_common_flags(p_synth)
    p_synth.add_argument("--seed", type=int, help="scene seed override")
    p_synth.add_argument("--frames", type=int, help="frame count override")

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = _build_config(args)
        if args.command == "flow":
            cmd_flow(cfg, args.frame1, args.frame2)
        elif args.command == "predict":
            cmd_predict(cfg)
        elif args.command == "evaluate":
            cmd_evaluate(cfg)
        elif args.command == "synth":
            scene_values = parse_config_file(args.config) if args.config else {}
            scene_values = {
                k: v for k, v in scene_values.items()
                if k in _SCENE_KEYS or k in ("velocity_x", "velocity_y")
            }
            scene = _scene_from_config(scene_values)
            if args.seed is not None:
                scene = replace(scene, seed=args.seed)
            if args.frames is not None:
                scene = replace(scene, n_frames=args.frames)
            cmd_synth(cfg, scene)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
