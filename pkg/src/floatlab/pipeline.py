"""Readability experiment orchestration.

An experiment compares recognition quality across conditions: motion
profiles (Slow vs Fast), page layouts, or fonts.  Per trial the same
derived seeds drive every condition (paired design: trial seeds differ
across trials, never across conditions), so pairwise differences isolate
the condition effect and the paired sign-flip permutation test applies.

Trial recipe: simulate floaters, render occlusion per frame, collapse to a
time-averaged overlay (Composite mode), render the text page, blend the
overlay's shadow over it, recognize (deterministic mock engine or an
external command), score against ground truth.  Failures abort only their
own (condition, trial) cell and are recorded in the report.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import shlex
import subprocess
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from importlib.resources import files
from pathlib import Path
from typing import Sequence

import numpy as np

from . import raster, sim
from .config import SimConfig
from .errors import (ConfigError, FloatlabError, OcrEngineError,
                     ResourceError)
from .metrics import (ErrorReport, SignificanceResult, Transcript,
                      TranscriptWord, error_report, paired_permutation_test)

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"

# mock-engine damage model constants
_DROP_THRESHOLD = 0.6
_SUBSTITUTION_GAIN = 0.8


@lru_cache(maxsize=1)
def _word_list() -> tuple[str, ...]:
    text = files("floatlab").joinpath("data/words.txt").read_text()
    return tuple(text.split())


def bundled_font(name: str = "DejaVuSans.ttf") -> str:
    """Filesystem path of a font shipped with the package."""
    path = files("floatlab").joinpath(f"data/fonts/{name}")
    if name != "." and not Path(str(path)).is_file():
        raise ResourceError(f"no bundled font named {name!r}")
    return str(path)


def bundled_fonts() -> list[str]:
    """All shipped font files, sorted by name."""
    fonts_dir = Path(bundled_font("."))
    return [str(p) for p in sorted(fonts_dir.glob("*.ttf"))]


def generate_random_text(seed, n_words: int) -> str:
    """n_words tokens drawn uniformly with replacement from the word list."""
    if n_words < 1:
        raise ValueError("n_words must be >= 1")
    words = _word_list()
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(words), size=n_words)
    return " ".join(words[i] for i in idx)


def mock_recognize(page: raster.FrameImage, truth: raster.GroundTruth,
                   overlay: raster.OcclusionMap, seed) -> Transcript:
    """Deterministic stand-in OCR driven by per-word mean occlusion.

    occ > 0.6 drops the word; otherwise each character flips to a random
    other lowercase letter with probability min(1, 0.8*occ) and the word's
    confidence is 1 - occ.
    """
    if (page.height, page.width) != (overlay.height, overlay.width):
        raise ValueError("page and overlay dimensions differ")
    rng = np.random.default_rng(seed)
    v = overlay.values
    h, w = v.shape
    out: list[TranscriptWord] = []
    for word in truth.words:
        x0 = max(int(np.floor(word.x0)), 0)
        x1 = min(int(np.ceil(word.x1)), w)
        y0 = max(int(np.floor(word.y0)), 0)
        y1 = min(int(np.ceil(word.y1)), h)
        box = v[y0:y1, x0:x1]
        occ = float(box.mean()) if box.size else 0.0
        if occ > _DROP_THRESHOLD:
            continue
        p = min(1.0, _SUBSTITUTION_GAIN * occ)
        chars = []
        for ch in word.text:
            if rng.random() < p:
                pool = _ALPHABET.replace(ch, "") if ch in _ALPHABET \
                    else _ALPHABET
                ch = pool[rng.integers(0, len(pool))]
            chars.append(ch)
        conf = min(max(1.0 - occ, 0.0), 1.0)
        out.append(TranscriptWord("".join(chars), conf))
    return Transcript(tuple(out))


def recognize_external(command_template: str, image_path) -> Transcript:
    """Run an external OCR command on one image and parse its stdout.

    The template is shell-split; every "{image}" is replaced by the image
    path (appended as a final argument when the placeholder is absent).
    Expected stdout: JSON {"words": [{"text": ..., "conf": ...}, ...]}.
    Confidences outside [0, 1] are clamped with a warning.
    """
    image_path = str(image_path)
    argv = shlex.split(command_template)
    if not argv:
        raise OcrEngineError("empty OCR command template")
    if any("{image}" in a for a in argv):
        argv = [a.replace("{image}", image_path) for a in argv]
    else:
        argv.append(image_path)
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise OcrEngineError(f"cannot spawn OCR command: {exc}",
                             command=command_template)
    if proc.returncode != 0:
        raise OcrEngineError(
            f"OCR command exited {proc.returncode}",
            command=command_template, exit_code=proc.returncode,
            stderr=proc.stderr)
    try:
        doc = json.loads(proc.stdout)
        raw_words = doc["words"]
        parsed = [(str(w["text"]), float(w["conf"])) for w in raw_words]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise OcrEngineError(f"malformed OCR output: {exc}",
                             command=command_template, stderr=proc.stderr)
    out = []
    for text, conf in parsed:
        if not 0.0 <= conf <= 1.0:
            warnings.warn(f"OCR confidence {conf} outside [0, 1]; clamped",
                          RuntimeWarning, stacklevel=2)
            conf = min(max(conf, 0.0), 1.0)
        out.append(TranscriptWord(text, conf))
    return Transcript(tuple(out))


class ExperimentKind(enum.Enum):
    FONTS = "Fonts"
    LAYOUTS = "Layouts"
    MOTION = "Motion"


@dataclass(frozen=True)
class MotionCondition:
    name: str
    frame_count: int
    per_frame_opacity_scale: float
    speed_multiplier: float

    def to_json_dict(self) -> dict:
        return {"name": self.name, "frame_count": self.frame_count,
                "per_frame_opacity_scale": self.per_frame_opacity_scale,
                "speed_multiplier": self.speed_multiplier}


DEFAULT_MOTION = (
    MotionCondition("Slow", frame_count=10, per_frame_opacity_scale=1.0,
                    speed_multiplier=1.0),
    MotionCondition("Fast", frame_count=100, per_frame_opacity_scale=0.1,
                    speed_multiplier=10.0),
)


def default_motion_sim() -> SimConfig:
    """Experiment profile for the Slow/Fast comparison.

    The 10x Fast condition must keep its floaters on the canvas for the
    whole 100-frame capture, so the base drift is slow (25 px/s saccade)
    with the fade threshold below the Slow condition's speed.  Thick
    strokes make a near-static floater blot out whole words while the
    same floater moving fast smears moderate occlusion across many.
    """
    base = SimConfig()
    return dataclasses.replace(
        base,
        chain=dataclasses.replace(base.chain, radius_range=(3.5, 5.5),
                                  segment_length_range=(10.0, 20.0)),
        drift=dataclasses.replace(base.drift, saccade_speed=25.0,
                                  settle_speed=12.5),
        adaptation=dataclasses.replace(base.adaptation, speed_threshold=5.0))


@dataclass(frozen=True)
class ExperimentSpec:
    kind: ExperimentKind
    trials: int = 20
    words_per_page: int = 80
    master_seed: int = 0
    ocr: str = "mock"
    fonts: tuple[str, ...] | None = None
    layouts: tuple[raster.Layout, ...] | None = None
    motion: tuple[MotionCondition, ...] = DEFAULT_MOTION
    # 14pt keeps 80 words inside even the narrow column, no truncation
    font_size: int = 14
    # fixed motion profile for Fonts/Layouts overlays: simulate
    # profile_frames*profile_stride steps, keep every stride-th frame
    profile_frames: int = 60
    profile_stride: int = 4
    profile_scale: float = 0.25
    permutations: int = 10000
    sim: SimConfig | None = None  # None = kind-tuned default

    def resolved_sim(self) -> SimConfig:
        if self.sim is not None:
            return self.sim
        if self.kind is ExperimentKind.MOTION:
            return default_motion_sim()
        return SimConfig()

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.words_per_page < 1:
            raise ConfigError("words_per_page must be >= 1")
        if self.kind is ExperimentKind.MOTION:
            if len(self.motion) < 1:
                raise ConfigError("Motion experiment needs >= 1 condition")
            by_name = {c.name: c for c in self.motion}
            slow, fast = by_name.get("Slow"), by_name.get("Fast")
            if slow and fast:
                expected = slow.per_frame_opacity_scale * (
                    slow.frame_count / fast.frame_count)
                if abs(fast.per_frame_opacity_scale - expected) > 1e-12:
                    raise ConfigError(
                        "Fast per_frame_opacity_scale must equal Slow scale "
                        "x (Slow frames / Fast frames)")
        if not 0.0 < self.profile_scale <= 1.0:
            raise ConfigError("profile_scale must be in (0, 1]")
        if self.profile_frames < 1 or self.profile_stride < 1:
            raise ConfigError("profile_frames and profile_stride must be >= 1")
        self.resolved_sim().validate()

    def resolved_fonts(self) -> tuple[str, ...]:
        if self.fonts:
            return tuple(self.fonts)
        if self.kind is ExperimentKind.FONTS:
            return tuple(bundled_fonts())
        return (bundled_font(),)

    def resolved_layouts(self) -> tuple[raster.Layout, ...]:
        if self.layouts:
            return tuple(self.layouts)
        if self.kind is ExperimentKind.LAYOUTS:
            return tuple(raster.Layout)
        return (raster.Layout.SINGLE_COLUMN,)

    def condition_names(self) -> list[str]:
        if self.kind is ExperimentKind.MOTION:
            return [c.name for c in self.motion]
        if self.kind is ExperimentKind.LAYOUTS:
            return [lay.value for lay in self.resolved_layouts()]
        return [Path(f).stem for f in self.resolved_fonts()]

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "trials": self.trials,
            "words_per_page": self.words_per_page,
            "master_seed": self.master_seed,
            "ocr": self.ocr,
            "fonts": list(self.fonts) if self.fonts else None,
            "layouts": [l.value for l in self.layouts]
            if self.layouts else None,
            "motion": [c.to_json_dict() for c in self.motion],
            "font_size": self.font_size,
            "profile_frames": self.profile_frames,
            "profile_stride": self.profile_stride,
            "profile_scale": self.profile_scale,
            "permutations": self.permutations,
            "sim": self.sim.to_json_dict() if self.sim else None,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ExperimentSpec":
        d = dict(data)
        try:
            kind = ExperimentKind(d.pop("kind"))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad experiment kind: {exc}")
        try:
            if "sim" in d and d["sim"] is not None:
                d["sim"] = SimConfig.from_json_dict(d["sim"])
            if d.get("fonts") is not None:
                d["fonts"] = tuple(str(f) for f in d["fonts"])
            if d.get("layouts") is not None:
                d["layouts"] = tuple(raster.Layout(l) for l in d["layouts"])
            if d.get("motion") is not None:
                d["motion"] = tuple(MotionCondition(**m) for m in d["motion"])
            d = {k: v for k, v in d.items() if v is not None}
            spec = cls(kind=kind, **d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad experiment spec: {exc}")
        spec.validate()
        return spec

    @classmethod
    def load(cls, path) -> "ExperimentSpec":
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"experiment spec not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}")
        return cls.from_json_dict(data)


@dataclass(frozen=True)
class TrialResult:
    trial: int
    report: ErrorReport | None = None
    error: str | None = None


@dataclass(frozen=True)
class ConditionResult:
    name: str
    trials: tuple[TrialResult, ...]

    def successes(self) -> list[TrialResult]:
        return [t for t in self.trials if t.report is not None]

    def aggregate(self) -> dict:
        ok = self.successes()
        if not ok:
            return {"n": 0}
        def stats(vals):
            arr = np.asarray(vals, dtype=float)
            return float(arr.mean()), float(arr.std())
        wm, ws = stats([t.report.wer for t in ok])
        cm, cs = stats([t.report.cer for t in ok])
        fm, fs = stats([t.report.mean_confidence for t in ok])
        return {"n": len(ok), "wer_mean": wm, "wer_std": ws,
                "cer_mean": cm, "cer_std": cs,
                "confidence_mean": fm, "confidence_std": fs}


@dataclass(frozen=True)
class PairwiseTest:
    condition_a: str
    condition_b: str
    metric: str
    result: SignificanceResult


@dataclass(frozen=True)
class ExperimentReport:
    kind: ExperimentKind
    engine: str
    master_seed: int
    config_hash: str
    conditions: tuple[ConditionResult, ...]
    pairwise: tuple[PairwiseTest, ...]

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "experiment": self.kind.value,
            "engine": self.engine,
            "master_seed": self.master_seed,
            "config_hash": self.config_hash,
            "conditions": [
                {
                    "name": c.name,
                    "aggregate": c.aggregate(),
                    "trials": [
                        {"trial": t.trial,
                         **(t.report.to_json_dict() if t.report else {}),
                         **({"error": t.error} if t.error else {})}
                        for t in c.trials
                    ],
                }
                for c in self.conditions
            ],
            "pairwise": [
                {"a": p.condition_a, "b": p.condition_b, "metric": p.metric,
                 "p_value": p.result.p_value,
                 "statistic": p.result.statistic,
                 "method": p.result.method,
                 "permutations": p.result.permutations}
                for p in self.pairwise
            ],
        }

    def to_csv_text(self) -> str:
        lines = ["condition,trial,wer,cer,confidence"]
        for c in self.conditions:
            for t in c.trials:
                if t.report is not None:
                    lines.append(
                        f"{c.name},{t.trial},{t.report.wer:.6f},"
                        f"{t.report.cer:.6f},{t.report.mean_confidence:.6f}")
                else:
                    lines.append(f"{c.name},{t.trial},,,")
        return "\n".join(lines) + "\n"


def _trial_seeds(master_seed: int, trial: int) -> dict:
    """Derived seeds for one trial; identical across conditions."""
    def seq(tag: int) -> np.random.SeedSequence:
        return np.random.SeedSequence([master_seed, trial, tag])
    return {
        "sim": int(seq(0).generate_state(1, np.uint64)[0]),
        "text": seq(1),
        "ocr": seq(2),
        "direction": seq(3),
    }


def _saccade_direction(kind: ExperimentKind, seed_seq) -> np.ndarray:
    """Per-kind saccade axis.

    Motion trials use a horizontal saccade with a seeded random sign so
    the slow and fast sweeps stay on canvas.  Fonts/Layouts trials look
    straight down: the whole trace then drifts through the page top to
    bottom and dwell time grows with depth as the field decays, which is
    what differentiates shallow from deep text blocks.
    """
    if kind is ExperimentKind.MOTION:
        rng = np.random.default_rng(seed_seq)
        return np.array([1.0 if rng.random() < 0.5 else -1.0, 0.0])
    return np.array([0.0, 1.0])


def _simulate_occlusion(config: SimConfig, direction: np.ndarray,
                        n_frames: int, stride: int = 1,
                        ) -> list[raster.OcclusionMap]:
    """Run one trace and collect every stride-th post-step occlusion map."""
    state = sim.init_simulation(config)
    sim.trigger_eye_movement(state, direction)
    maps = []
    for k in range(n_frames * stride):
        sim.step(state, config.dt)
        if (k + 1) % stride == 0:
            _, occ = raster.render_frame(state, config)
            maps.append(occ)
    return maps


def _trial_overlay(spec: ExperimentSpec, condition_name: str,
                   seeds: dict) -> raster.OcclusionMap:
    base = spec.resolved_sim()
    direction = _saccade_direction(spec.kind, seeds["direction"])
    if spec.kind is ExperimentKind.MOTION:
        cond = next(c for c in spec.motion if c.name == condition_name)
        drift = dataclasses.replace(
            base.drift,
            saccade_speed=base.drift.saccade_speed * cond.speed_multiplier,
            settle_speed=base.drift.settle_speed * cond.speed_multiplier)
        config = dataclasses.replace(base, seed=seeds["sim"], drift=drift)
        maps = _simulate_occlusion(config, direction, cond.frame_count)
        return raster.accumulate_overlay(
            maps, cond.per_frame_opacity_scale, raster.OverlayMode.COMPOSITE)
    config = dataclasses.replace(base, seed=seeds["sim"])
    maps = _simulate_occlusion(config, direction, spec.profile_frames,
                               spec.profile_stride)
    return raster.accumulate_overlay(
        maps, spec.profile_scale, raster.OverlayMode.COMPOSITE)


def _text_spec_for(spec: ExperimentSpec, condition_name: str,
                   text: str) -> raster.TextSpec:
    font = spec.resolved_fonts()[0]
    layout = raster.Layout.SINGLE_COLUMN
    if spec.kind is ExperimentKind.LAYOUTS:
        layout = raster.Layout(condition_name)
    elif spec.kind is ExperimentKind.FONTS:
        font = next(f for f in spec.resolved_fonts()
                    if Path(f).stem == condition_name)
    sim_config = spec.resolved_sim()
    return raster.TextSpec(
        text=text, font_path=font, font_size=spec.font_size, layout=layout,
        page_width=sim_config.canvas_width,
        page_height=sim_config.canvas_height)


def run_experiment(spec: ExperimentSpec,
                   out_dir=None) -> ExperimentReport:
    """Run every (condition, trial) cell and assemble the report.

    out_dir is only required for external OCR engines (composited images
    must exist on disk for the subprocess); the mock engine works fully
    in memory.
    """
    spec.validate()
    use_mock = spec.ocr == "mock"
    if not use_mock and not spec.ocr.startswith("exec:"):
        raise ConfigError(f"unknown OCR engine {spec.ocr!r}; "
                          "use 'mock' or 'exec:<command template>'")
    command = None if use_mock else spec.ocr[len("exec:"):]
    image_dir = None
    if not use_mock:
        if out_dir is None:
            raise ConfigError("external OCR needs an output directory")
        image_dir = Path(out_dir) / "images"
        image_dir.mkdir(parents=True, exist_ok=True)

    sim_config = spec.resolved_sim()
    names = spec.condition_names()
    results: dict[str, list[TrialResult]] = {n: [] for n in names}
    # trial-major order so per-trial work (text, overlay seeds) lines up
    for trial in range(spec.trials):
        seeds = _trial_seeds(spec.master_seed, trial)
        text = generate_random_text(seeds["text"], spec.words_per_page)
        overlay_cache: dict = {}
        for name in names:
            try:
                if spec.kind is ExperimentKind.MOTION:
                    overlay = _trial_overlay(spec, name, seeds)
                else:
                    # Fonts/Layouts share one fixed motion profile per trial
                    if "overlay" not in overlay_cache:
                        overlay_cache["overlay"] = _trial_overlay(
                            spec, name, seeds)
                    overlay = overlay_cache["overlay"]
                page, truth = raster.render_text_page(
                    _text_spec_for(spec, name, text))
                composed = raster.composite(page, overlay,
                                            sim_config.shadow_level)
                if use_mock:
                    transcript = mock_recognize(
                        composed, truth, overlay, seeds["ocr"])
                else:
                    img_path = image_dir / f"{name}_{trial:03d}.png"
                    composed.to_pil().save(img_path)
                    transcript = recognize_external(command, img_path)
                results[name].append(TrialResult(
                    trial, report=error_report(truth.text, transcript)))
            except FloatlabError as exc:
                results[name].append(TrialResult(trial, error=str(exc)))

    conditions = tuple(ConditionResult(n, tuple(results[n])) for n in names)
    pairwise = _pairwise_tests(spec, conditions)
    return ExperimentReport(
        kind=spec.kind, engine=spec.ocr, master_seed=spec.master_seed,
        config_hash=sim_config.config_hash(), conditions=conditions,
        pairwise=pairwise)


def _pairwise_tests(spec: ExperimentSpec,
                    conditions: Sequence[ConditionResult],
                    ) -> tuple[PairwiseTest, ...]:
    metrics_of = {
        "wer": lambda r: r.wer,
        "cer": lambda r: r.cer,
        "confidence": lambda r: r.mean_confidence,
    }
    tests = []
    for i, ca in enumerate(conditions):
        for j in range(i + 1, len(conditions)):
            cb = conditions[j]
            ok_a = {t.trial: t.report for t in ca.successes()}
            ok_b = {t.trial: t.report for t in cb.successes()}
            common = sorted(set(ok_a) & set(ok_b))
            if len(common) < 2:
                continue
            for metric, get in metrics_of.items():
                a_vals = [get(ok_a[t]) for t in common]
                b_vals = [get(ok_b[t]) for t in common]
                seed = int(np.random.SeedSequence(
                    [spec.master_seed, 7, i, j]).generate_state(1)[0])
                tests.append(PairwiseTest(
                    ca.name, cb.name, metric,
                    paired_permutation_test(a_vals, b_vals,
                                            spec.permutations, seed)))
    return tuple(tests)


def write_report(report: ExperimentReport, out_dir) -> tuple[Path, Path]:
    """Emit report.json and report.csv; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "report.json"
    csv_path = out / "report.csv"
    json_path.write_text(
        json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")
    csv_path.write_text(report.to_csv_text())
    return json_path, csv_path
