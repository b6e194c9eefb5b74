"""Command-line entry point.

Subcommands: config-init, simulate, overlay, textpage, clarity, evaluate.
Exit codes: 0 success, 1 usage error, 2 configuration or resource error,
3 OCR engine failure.  FLOATLAB_SEED serves as a seed fallback when no
--seed flag is given.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import pipeline, raster, sim
from .config import SimConfig
from .errors import ConfigError, OcrEngineError, ResourceError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_OCR = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here reserves 2 for
    # config/resource problems, so remap to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="floatlab",
                     description="Floater-vision simulation and "
                                 "readability experiments.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("config-init",
                       help="emit the default simulation config as JSON")
    p.add_argument("--out", help="output path (stdout when omitted)")

    p = sub.add_parser("simulate",
                       help="run one trace and export frames + occlusion")
    p.add_argument("--config", help="simulation config JSON")
    p.add_argument("--out", required=True, help="output frame directory")
    p.add_argument("--seconds", type=float, default=12.0)
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--event", action="append", default=[],
                   metavar="T,DX,DY",
                   help="extra eye-movement trigger (repeatable); one "
                        "random-direction trigger always fires at t=0")

    p = sub.add_parser("overlay",
                       help="collapse exported occlusion maps into one "
                            "overlay PNG")
    p.add_argument("--frames", required=True,
                   help="directory containing occ_*.png")
    p.add_argument("--mode", choices=["mean", "composite"],
                   default="composite")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--out", required=True, help="overlay PNG path (16-bit)")

    p = sub.add_parser("textpage", help="render a text page with word boxes")
    p.add_argument("--text", help="literal text (default: random words)")
    p.add_argument("--words", type=int, default=80,
                   help="word count for random text")
    p.add_argument("--seed", type=int)
    p.add_argument("--font", help="font file (default: bundled DejaVuSans)")
    p.add_argument("--font-size", type=int, default=16)
    p.add_argument("--layout", default="SingleColumn",
                   choices=[l.value for l in raster.Layout])
    p.add_argument("--out", required=True, help="page PNG path")

    p = sub.add_parser("clarity",
                       help="per-box clarity CSV from exported occlusion")
    p.add_argument("--frames", required=True,
                   help="directory containing occ_*.png")
    p.add_argument("--grid", default="8x6", metavar="WxH",
                   help="boxes across x down (default 8x6)")
    p.add_argument("--out", required=True, help="CSV path")

    p = sub.add_parser("evaluate", help="run a readability experiment")
    p.add_argument("--spec", required=True, help="experiment spec JSON")
    p.add_argument("--out", default=".", help="report directory")
    p.add_argument("--ocr", help="override engine: mock | exec:<template>")
    p.add_argument("--seed", type=int, help="override master seed")
    return parser


def _env_seed() -> int | None:
    raw = os.environ.get("FLOATLAB_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"FLOATLAB_SEED must be an integer, got {raw!r}")


def _resolve_seed(flag_seed: int | None, fallback: int) -> int:
    if flag_seed is not None:
        return flag_seed
    env = _env_seed()
    if env is not None:
        return env
    return fallback


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        cols, rows = text.lower().split("x")
        cols, rows = int(cols), int(rows)
    except ValueError:
        raise ValueError(f"grid must look like 8x6, got {text!r}")
    if cols < 1 or rows < 1:
        raise ValueError("grid dimensions must be >= 1")
    return cols, rows


def _parse_event(text: str) -> tuple[float, float, float]:
    try:
        t, dx, dy = (float(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"event must look like t,dx,dy, got {text!r}")
    if t < 0:
        raise ValueError("event time must be >= 0")
    return t, dx, dy


def _cmd_config_init(args) -> int:
    text = SimConfig().to_json()
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    if args.seconds <= 0 or args.fps <= 0:
        raise ValueError("--seconds and --fps must be > 0")
    config = SimConfig.load(args.config) if args.config else SimConfig()
    seed = _resolve_seed(args.seed, config.seed)
    config = dataclasses.replace(config, seed=seed, dt=1.0 / args.fps)
    config.validate()
    dt = config.dt
    events = sorted(_parse_event(e) for e in args.event)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    state = sim.init_simulation(config)
    sim.trigger_eye_movement(state)
    n_frames = round(args.seconds * args.fps)
    ei = 0
    for k in range(n_frames):
        t = k * dt
        while ei < len(events) and events[ei][0] <= t + 1e-9:
            _, dx, dy = events[ei]
            sim.trigger_eye_movement(state, np.array([dx, dy]))
            ei += 1
        frame, occ = raster.render_frame(state, config)
        raster.save_frame_png(frame, out / f"frame_{k:06d}.png")
        raster.save_occlusion_png(occ, out / f"occ_{k:06d}.png")
        sim.step(state, dt)
    print(f"wrote {n_frames} frames to {out}")
    print(f"wrote {n_frames} occlusion maps to {out}")
    return EXIT_OK


def _cmd_overlay(args) -> int:
    maps = raster.load_occlusion_maps(args.frames)
    overlay = raster.accumulate_overlay(maps, args.scale, args.mode)
    raster.save_occlusion_png(overlay, args.out)
    print(f"wrote {args.out} ({args.mode}, {len(maps)} frames)")
    return EXIT_OK


def _cmd_textpage(args) -> int:
    if args.text:
        text = args.text
    else:
        seed = _resolve_seed(args.seed, 0)
        text = pipeline.generate_random_text(seed, args.words)
    spec = raster.TextSpec(
        text=text,
        font_path=args.font or pipeline.bundled_font(),
        font_size=args.font_size,
        layout=raster.Layout(args.layout))
    frame, truth = raster.render_text_page(spec)
    raster.save_frame_png(frame, args.out)
    boxes_path = Path(args.out).with_suffix(".boxes.json")
    boxes_path.write_text(json.dumps(
        {"words": [{"text": w.text, "box": [w.x0, w.y0, w.x1, w.y1]}
                   for w in truth.words]},
        indent=2, sort_keys=True) + "\n")
    print(f"wrote {args.out} ({len(truth.words)} words)")
    print(f"wrote {boxes_path}")
    return EXIT_OK


def _cmd_clarity(args) -> int:
    cols, rows = _parse_grid(args.grid)
    maps = raster.load_occlusion_maps(args.frames)
    series = raster.clarity_series(maps, (cols, rows))
    series.write_csv(args.out)
    print(f"wrote {args.out} ({len(maps)} frames x {cols * rows} boxes)")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    spec = pipeline.ExperimentSpec.load(args.spec)
    overrides = {}
    if args.ocr:
        overrides["ocr"] = args.ocr
    seed = _resolve_seed(args.seed, spec.master_seed)
    if seed != spec.master_seed:
        overrides["master_seed"] = seed
    if overrides:
        spec = dataclasses.replace(spec, **overrides)
    report = pipeline.run_experiment(spec, out_dir=args.out)
    for cond in report.conditions:
        agg = cond.aggregate()
        if agg["n"]:
            print(f"{cond.name}: wer={agg['wer_mean']:.4f} "
                  f"cer={agg['cer_mean']:.4f} "
                  f"confidence={agg['confidence_mean']:.4f} (n={agg['n']})")
        else:
            print(f"{cond.name}: no successful trials")
    for pw in report.pairwise:
        print(f"{pw.condition_a} vs {pw.condition_b} [{pw.metric}]: "
              f"p={pw.result.p_value:.6f}")
    json_path, csv_path = pipeline.write_report(report, args.out)
    print(f"wrote {json_path}")
    print(f"wrote {csv_path}")
    # Partial trial failures are recorded in the report and still exit 0;
    # a run where *nothing* succeeded means the engine itself is broken.
    if not any(cond.successes() for cond in report.conditions):
        print("error: no trial produced a transcript", file=sys.stderr)
        return EXIT_OCR
    return EXIT_OK


_COMMANDS = {
    "config-init": _cmd_config_init,
    "simulate": _cmd_simulate,
    "overlay": _cmd_overlay,
    "textpage": _cmd_textpage,
    "clarity": _cmd_clarity,
    "evaluate": _cmd_evaluate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except OcrEngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.stderr:
            print(exc.stderr.rstrip(), file=sys.stderr)
        return EXIT_OCR
    except (ConfigError, ResourceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
