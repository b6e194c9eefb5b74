"""Simulation configuration: defaults, validation, JSON round-trip.

The canvas is a 3:4 (width:height) window onto an unbounded plane; floaters
may drift off the edges and are simply clipped at render time.  All lengths
are in canvas pixels, all times in seconds, speeds in pixels/second.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class DriftParams:
    """Two-phase drift field: a saccade kick, then a downward settle.

    Each phase's speed decays exponentially with its own time constant;
    the time constants are chosen so a phase decays below 5% of its
    initial speed within its duration window.
    """

    saccade_speed: float = 320.0      # px/s at saccade onset
    settle_speed: float = 160.0       # px/s at settle onset, directed down
    tau_saccade: float = 1.0          # s
    tau_settle: float = 3.0           # s
    saccade_duration: float = 3.0     # s
    settle_duration: float = 9.0      # s
    drag_coefficient: float = 20.0    # 1/s, velocity relaxation rate toward the field


@dataclass(frozen=True)
class AdaptationParams:
    """Speed-gated alpha fade modelling neural adaptation.

    A shadow that moves less than its own radius within one 80 ms
    adaptation period counts as retinally still and fades out; faster
    motion recovers visibility.  ``speed_threshold=None`` derives the
    threshold as mean_particle_radius / adaptation_period.
    """

    speed_threshold: float | None = None  # px/s; None = derived
    fade_time_constant: float = 0.5       # s
    recover_time_constant: float = 0.1    # s
    adaptation_period: float = 0.080      # s, fixed perceptual constant


@dataclass(frozen=True)
class ChainParams:
    """Geometry sampling for floater chains.

    Chains are seeded random walks: per-joint turn angles are normal with
    ``turn_stddev``, so low stddev gives line-like floaters and high gives
    web-like tangles; two-particle chains render as dots.  ``drag_jitter``
    scales per-particle drag in [1-j, 1+j] so chains shear, spin and deform
    while the field accelerates or decelerates.
    """

    segment_length_range: tuple[float, float] = (14.0, 30.0)  # px
    radius_range: tuple[float, float] = (2.0, 4.0)            # px
    turn_stddev: float = 0.5                                  # radians
    bend_compliance_range: tuple[float, float] = (1e-4, 5e-2)
    drag_jitter: float = 0.2


@dataclass(frozen=True)
class SimConfig:
    canvas_width: int = 480
    canvas_height: int = 640           # width:height must be exactly 3:4
    floater_count: int = 14
    chain_length_range: tuple[int, int] = (3, 8)
    compliance_range: tuple[float, float] = (0.0, 1e-3)   # distance constraints
    base_opacity_range: tuple[float, float] = (0.35, 0.70)
    seed: int = 0
    dt: float = 1.0 / 30.0
    solver_iterations: int = 8
    shadow_level: float = 0.25         # composited shadow luminance in [0,1)
    drift: DriftParams = field(default_factory=DriftParams)
    adaptation: AdaptationParams = field(default_factory=AdaptationParams)
    chain: ChainParams = field(default_factory=ChainParams)

    def validate(self) -> None:
        if self.canvas_width <= 0 or self.canvas_height <= 0:
            raise ConfigError("canvas dimensions must be positive")
        if 4 * self.canvas_width != 3 * self.canvas_height:
            raise ConfigError(
                f"canvas must have a 3:4 width:height aspect, got "
                f"{self.canvas_width}x{self.canvas_height}")
        if self.floater_count < 0:
            raise ConfigError("floater_count must be >= 0")
        if self.dt <= 0:
            raise ConfigError("dt must be > 0")
        if self.solver_iterations < 1:
            raise ConfigError("solver_iterations must be >= 1")
        if not 0.0 <= self.shadow_level < 1.0:
            raise ConfigError("shadow_level must be in [0, 1)")
        _check_range(self.chain_length_range, "chain_length_range", low=2)
        _check_range(self.compliance_range, "compliance_range", low=0.0)
        _check_range(self.base_opacity_range, "base_opacity_range")
        lo, hi = self.base_opacity_range
        if not (0.0 < lo and hi <= 1.0):
            raise ConfigError("base_opacity_range must lie within (0, 1]")
        _check_range(self.chain.segment_length_range, "segment_length_range")
        _check_range(self.chain.radius_range, "radius_range")
        _check_range(self.chain.bend_compliance_range, "bend_compliance_range",
                     low=0.0)
        for name in ("saccade_speed", "settle_speed", "tau_saccade",
                     "tau_settle", "saccade_duration", "settle_duration"):
            if getattr(self.drift, name) <= 0:
                raise ConfigError(f"drift.{name} must be > 0")
        if self.drift.drag_coefficient < 0:
            raise ConfigError("drift.drag_coefficient must be >= 0")
        ad = self.adaptation
        for name in ("fade_time_constant", "recover_time_constant",
                     "adaptation_period"):
            if getattr(ad, name) <= 0:
                raise ConfigError(f"adaptation.{name} must be > 0")
        if ad.speed_threshold is not None and ad.speed_threshold <= 0:
            raise ConfigError("adaptation.speed_threshold must be > 0")

    def resolved_speed_threshold(self) -> float:
        """Adaptation speed threshold, deriving the default when unset."""
        if self.adaptation.speed_threshold is not None:
            return self.adaptation.speed_threshold
        r_lo, r_hi = self.chain.radius_range
        return 0.5 * (r_lo + r_hi) / self.adaptation.adaptation_period

    def to_json_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    def config_hash(self) -> str:
        canon = json.dumps(self.to_json_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SimConfig":
        try:
            doc = dict(doc)
            drift = DriftParams(**doc.pop("drift", {}))
            adaptation = AdaptationParams(**doc.pop("adaptation", {}))
            chain_doc = {k: _as_pair(v) if k.endswith("_range") else v
                         for k, v in doc.pop("chain", {}).items()}
            chain = ChainParams(**chain_doc)
            top = {k: _as_pair(v) if k.endswith("_range") else v
                   for k, v in doc.items()}
            cfg = cls(drift=drift, adaptation=adaptation, chain=chain, **top)
        except TypeError as exc:
            raise ConfigError(f"bad config document: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "SimConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        return cls.from_json_dict(doc)


def _as_pair(value) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"range must be a [min, max] pair, got {value!r}")
    return tuple(value)


def _check_range(rng, name: str, low=None) -> None:
    lo, hi = rng
    if lo > hi:
        raise ConfigError(f"{name} is empty: min {lo} > max {hi}")
    if low is not None and lo < low:
        raise ConfigError(f"{name} minimum must be >= {low}")
