"""Rasterization: floater shadows, text pages, overlays, clarity grids.

Floater chains render as stroked polylines with circular joints.  Coverage
per pixel comes from capsule and disc distance fields with a 2-pixel linear
falloff at the boundary; chains composite multiplicatively, so per-pixel
occlusion is 1 - product(1 - opacity * alpha * coverage) and always lands
in [0, 1].  Frames are 8-bit grayscale on a white background; occlusion
maps export as 16-bit grayscale PNG.

Text pages are black-on-white via Pillow with four layout conditions whose
column geometry is fixed fractions of page width: SingleColumn 70%,
NarrowSingleColumn 30%, TwoColumns two 45% columns around a 10% gutter
(filled newspaper-style, left column to the bottom first), and WideSpaced
(SingleColumn with doubled word gaps and 1.5x line spacing).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .config import SimConfig
from .errors import ResourceError
from .sim import SimState

# stroke boundary transition width, pixels
_FALLOFF = 2.0


@dataclass(frozen=True)
class OcclusionMap:
    values: np.ndarray  # (height, width) floats in [0, 1]

    def __post_init__(self):
        v = self.values
        if v.ndim != 2:
            raise ValueError("occlusion values must be a 2D grid")
        if v.size and (float(v.min()) < 0.0 or float(v.max()) > 1.0):
            raise ValueError("occlusion values must lie in [0, 1]")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FrameImage:
    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        if self.pixels.ndim != 2 or self.pixels.dtype != np.uint8:
            raise ValueError("frame pixels must be a 2D uint8 grid")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def to_pil(self) -> Image.Image:
        return Image.fromarray(self.pixels, mode="L")


class Layout(enum.Enum):
    SINGLE_COLUMN = "SingleColumn"
    NARROW_SINGLE_COLUMN = "NarrowSingleColumn"
    TWO_COLUMNS = "TwoColumns"
    WIDE_SPACED = "WideSpaced"


@dataclass(frozen=True)
class TextSpec:
    text: str
    font_path: str
    font_size: int = 16
    layout: Layout = Layout.SINGLE_COLUMN
    page_width: int = 480
    page_height: int = 640
    margin: int = 24
    line_spacing: float = 1.0

    def __post_init__(self):
        if not self.text:
            raise ValueError("text must be non-empty")
        if self.page_width <= 0 or self.page_height <= 0:
            raise ValueError("page size must be positive")


@dataclass(frozen=True)
class WordBox:
    text: str
    x0: float
    y0: float
    x1: float
    y1: float


@dataclass(frozen=True)
class GroundTruth:
    words: tuple[WordBox, ...]

    @property
    def text(self) -> str:
        return " ".join(w.text for w in self.words)


@dataclass(frozen=True)
class ClaritySeries:
    cols: int
    rows: int
    values: np.ndarray  # (frames, rows, cols)

    def to_csv_text(self) -> str:
        lines = ["frame,box_col,box_row,clarity"]
        frames = self.values.shape[0]
        for f in range(frames):
            for r in range(self.rows):
                for c in range(self.cols):
                    lines.append(f"{f},{c},{r},{self.values[f, r, c]:.6f}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv_text())


def _cover_region(cov: np.ndarray, ax: float, ay: float, bx: float, by: float,
                  radius: float) -> None:
    """Max capsule (segment a-b, given radius) coverage into cov, in place."""
    h, w = cov.shape
    reach = radius + _FALLOFF / 2.0
    x_lo = max(int(math.floor(min(ax, bx) - reach)), 0)
    x_hi = min(int(math.ceil(max(ax, bx) + reach)) + 1, w)
    y_lo = max(int(math.floor(min(ay, by) - reach)), 0)
    y_hi = min(int(math.ceil(max(ay, by) + reach)) + 1, h)
    if x_lo >= x_hi or y_lo >= y_hi:
        return
    xs = np.arange(x_lo, x_hi) + 0.5
    ys = (np.arange(y_lo, y_hi) + 0.5)[:, None]
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    px = xs - ax
    py = ys - ay
    if seg2 > 0.0:
        t = np.clip((px * dx + py * dy) / seg2, 0.0, 1.0)
        ex = px - t * dx
        ey = py - t * dy
    else:
        ex, ey = px, py + np.zeros_like(px)
    d = np.hypot(ex, ey)
    c = np.clip((radius - d) / _FALLOFF + 0.5, 0.0, 1.0)
    region = cov[y_lo:y_hi, x_lo:x_hi]
    np.maximum(region, c, out=region)


def render_frame(state: SimState,
                 config: SimConfig) -> tuple[FrameImage, OcclusionMap]:
    """Draw all chains: white canvas, translucent gray shadows.

    Occlusion composites multiplicatively across chains; the frame is
    white blended toward config.shadow_level by the occlusion fraction.
    """
    h, w = config.canvas_height, config.canvas_width
    trans = np.ones((h, w))
    cov = np.empty((h, w))
    for chain in state.floaters:
        op = chain.base_opacity * chain.adaptation_alpha
        if op <= 1e-9:
            continue
        pos = chain.positions
        rad = chain.radius
        # composite only inside the chain's reach to keep frames cheap
        reach = float(rad.max()) + _FALLOFF / 2.0
        bx0 = max(int(math.floor(pos[:, 0].min() - reach)), 0)
        bx1 = min(int(math.ceil(pos[:, 0].max() + reach)) + 1, w)
        by0 = max(int(math.floor(pos[:, 1].min() - reach)), 0)
        by1 = min(int(math.ceil(pos[:, 1].max() + reach)) + 1, h)
        if bx0 >= bx1 or by0 >= by1:
            continue
        cov[by0:by1, bx0:bx1] = 0.0
        for i in range(len(pos) - 1):
            r = 0.5 * (rad[i] + rad[i + 1])
            _cover_region(cov, pos[i, 0], pos[i, 1],
                          pos[i + 1, 0], pos[i + 1, 1], r)
        for i in range(len(pos)):
            _cover_region(cov, pos[i, 0], pos[i, 1],
                          pos[i, 0], pos[i, 1], rad[i])
        trans[by0:by1, bx0:bx1] *= 1.0 - op * cov[by0:by1, bx0:bx1]
    occ = 1.0 - trans
    lum = 1.0 - occ * (1.0 - config.shadow_level)
    frame = FrameImage(np.round(lum * 255.0).astype(np.uint8))
    return frame, OcclusionMap(occ)


def _column_rects(spec: TextSpec) -> list[tuple[float, float]]:
    """(x0, width) per column, reading order."""
    w = spec.page_width
    if spec.layout is Layout.NARROW_SINGLE_COLUMN:
        cw = 0.30 * w
        return [((w - cw) / 2.0, cw)]
    if spec.layout is Layout.TWO_COLUMNS:
        cw = 0.45 * w
        gutter = 0.10 * w
        return [(0.0, cw), (cw + gutter, cw)]
    cw = 0.70 * w  # SingleColumn and WideSpaced share the 70% column
    return [((w - cw) / 2.0, cw)]


def render_text_page(spec: TextSpec) -> tuple[FrameImage, GroundTruth]:
    """Lay out and draw black-on-white text, returning per-word boxes.

    Greedy word wrap per column; TwoColumns fills the left column to the
    bottom before the right.  Words that cannot fit the page are dropped
    with a warning.
    """
    try:
        font = ImageFont.truetype(spec.font_path, spec.font_size)
    except OSError as exc:
        raise ResourceError(f"cannot load font {spec.font_path!r}: {exc}")
    ascent, descent = font.getmetrics()
    line_h = float(ascent + descent)
    gap = float(font.getlength(" "))
    step = line_h * spec.line_spacing
    if spec.layout is Layout.WIDE_SPACED:
        gap *= 2.0
        step *= 1.5

    columns = _column_rects(spec)
    y_limit = spec.page_height - spec.margin
    img = Image.new("L", (spec.page_width, spec.page_height), 255)
    draw = ImageDraw.Draw(img)
    boxes: list[WordBox] = []

    words = spec.text.split()
    col_i = 0
    col_x, col_w = columns[0]
    x, y = col_x, float(spec.margin)
    placed = 0
    for word in words:
        adv = float(font.getlength(word))
        if x > col_x and x + adv > col_x + col_w:
            x = col_x
            y += step
        while y + line_h > y_limit:
            col_i += 1
            if col_i >= len(columns):
                break
            col_x, col_w = columns[col_i]
            x, y = col_x, float(spec.margin)
        if y + line_h > y_limit:
            break
        if adv > col_w:
            warnings.warn(f"word {word!r} wider than its column",
                          RuntimeWarning, stacklevel=2)
        draw.text((x, y), word, font=font, fill=0)
        boxes.append(WordBox(word, x, y, x + adv, y + line_h))
        placed += 1
        x += adv + gap
    if placed < len(words):
        warnings.warn(f"page full: {len(words) - placed} of {len(words)} "
                      "words truncated", RuntimeWarning, stacklevel=2)

    frame = FrameImage(np.asarray(img, dtype=np.uint8))
    return frame, GroundTruth(tuple(boxes))


class OverlayMode(enum.Enum):
    MEAN = "mean"
    COMPOSITE = "composite"


def accumulate_overlay(maps: Sequence[OcclusionMap],
                       per_frame_scale: float = 1.0,
                       mode: OverlayMode | str = OverlayMode.COMPOSITE,
                       ) -> OcclusionMap:
    """Collapse per-frame occlusion into one time-averaged overlay.

    Mean is the pixelwise average of scale*value; Composite stacks frames
    with the over operator, 1 - product(1 - scale*value).
    """
    if isinstance(mode, str):
        mode = OverlayMode(mode.lower())
    if not maps:
        raise ValueError("need at least one occlusion map")
    if not 0.0 < per_frame_scale <= 1.0:
        raise ValueError("per_frame_scale must be in (0, 1]")
    shape = maps[0].values.shape
    for m in maps[1:]:
        if m.values.shape != shape:
            raise ValueError("occlusion map dimensions differ")
    if mode is OverlayMode.MEAN:
        total = np.zeros(shape)
        for m in maps:
            total += per_frame_scale * m.values
        return OcclusionMap(total / len(maps))
    trans = np.ones(shape)
    for m in maps:
        trans *= 1.0 - per_frame_scale * m.values
    return OcclusionMap(1.0 - trans)


def composite(page: FrameImage, overlay: OcclusionMap,
              shadow_level: float = 0.25) -> FrameImage:
    """Blend the overlay's shadow over a page image."""
    if (page.height, page.width) != (overlay.height, overlay.width):
        raise ValueError("page and overlay dimensions differ")
    if not 0.0 <= shadow_level < 1.0:
        raise ValueError("shadow_level must be in [0, 1)")
    lum = page.pixels / 255.0
    a = overlay.values
    out = lum * (1.0 - a) + shadow_level * a
    return FrameImage(np.round(out * 255.0).astype(np.uint8))


def clarity_series(maps: Sequence[OcclusionMap],
                   grid: tuple[int, int]) -> ClaritySeries:
    """Per-frame, per-grid-box clarity = 1 - mean occlusion in the box.

    Remainder pixels go to the last column/row when the grid does not
    divide the canvas.
    """
    cols, rows = grid
    if cols < 1 or rows < 1:
        raise ValueError("grid must have at least one column and row")
    if not maps:
        raise ValueError("need at least one occlusion map")
    h, w = maps[0].values.shape
    x_edges = [min(c * (w // cols), w) for c in range(cols)] + [w]
    y_edges = [min(r * (h // rows), h) for r in range(rows)] + [h]
    values = np.empty((len(maps), rows, cols))
    for f, m in enumerate(maps):
        v = m.values
        for r in range(rows):
            for c in range(cols):
                box = v[y_edges[r]:y_edges[r + 1], x_edges[c]:x_edges[c + 1]]
                values[f, r, c] = 1.0 - float(box.mean())
    return ClaritySeries(cols=cols, rows=rows, values=values)


def save_frame_png(frame: FrameImage, path) -> Path:
    path = Path(path)
    frame.to_pil().save(path)
    return path


def save_occlusion_png(occ: OcclusionMap, path) -> Path:
    """16-bit grayscale PNG, value = round(occlusion * 65535)."""
    path = Path(path)
    arr = np.round(occ.values * 65535.0).astype(np.uint16)
    Image.fromarray(arr).save(path)  # uint16 maps to 16-bit grayscale
    return path


def export_frames(frames: Sequence[FrameImage], directory,
                  occlusion: Sequence[OcclusionMap] | None = None,
                  ) -> list[Path]:
    """Write frame_%06d.png (8-bit) and, when given, occ_%06d.png (16-bit)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if occlusion is not None and len(occlusion) != len(frames):
        raise ValueError("occlusion map count must match frame count")
    written: list[Path] = []
    for i, frame in enumerate(frames):
        written.append(save_frame_png(frame, directory / f"frame_{i:06d}.png"))
    if occlusion is not None:
        for i, m in enumerate(occlusion):
            written.append(save_occlusion_png(m, directory / f"occ_{i:06d}.png"))
    return written


def load_occlusion_maps(directory) -> list[OcclusionMap]:
    """Read occ_%06d.png files back into occlusion maps, frame order."""
    directory = Path(directory)
    paths = sorted(directory.glob("occ_*.png"))
    if not paths:
        raise ResourceError(f"no occ_*.png files in {directory}")
    maps = []
    for p in paths:
        arr = np.asarray(Image.open(p), dtype=np.float64)
        maps.append(OcclusionMap(arr / 65535.0))
    return maps
