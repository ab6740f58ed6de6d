"""Deterministic generator of spectroscopy-like multichannel datasets.

Each wafer carries one two-plateau profile per channel, a global integer
time jitter (edge-padded shift), per-tick Gaussian noise, and an
end-of-run drop-off: the intensity descends over a fixed number of ticks
and then holds a bottom level until the run ends. On the signal channels
the descent slope (and with it the bottom level) varies per wafer, and the
etch rate is an affine function of that slope plus noise, so the
predictive signal lives in the tail of the signal channels.

Distractor channels carry the same silhouette with the fixed base slope,
plus two kinds of structure: their stage-2 level is weakly coupled to the
realized etch rate with channel-independent noise (so aggregate-statistic
models improve as channels are added), and a fixed-shape bump sits at a
random position inside stage 2 (invisible to stage means and stds, but
costly for series alignment). Every channel's stage-2 level also wobbles
slightly per wafer, modeling run-to-run drift.

All randomness comes from one ``numpy.random.default_rng(seed)`` stream
(PCG64) consumed in a fixed documented order: per wafer, the slope latent,
the rate noise, and the jitter shift are drawn, then per channel its
stage-2 wobble, (distractors only) level noise and bump position, and the
tick noise.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import ChannelSeries, Dataset, WaferRecord

GENERATOR_VERSION = "1.0"
PRNG_NAME = "numpy.random.PCG64 (numpy.random.default_rng)"

# Profile geometry, in arbitrary intensity units.
STAGE1_BASE = 1.0
STAGE1_CHANNEL_STEP = 0.15
PLATEAU_GAP = 4.0
SLOPE_BASE = 0.35
TAIL_FRACTION = 0.38  # of stage-2 ticks
RAMP_FRACTION = 0.57  # of the tail: descent ticks; the rest holds the bottom
STAGE2_WOBBLE_FACTOR = 0.5  # of noise_std: per-wafer stage-2 level drift

# Etch-rate model (rate units are opaque; only ratios matter for MAPE).
RATE_BASE = 100.0
RATE_COUPLING = 25.0
RATE_NOISE_STD = 0.4

# Distractor-channel structure.
DISTRACTOR_COUPLING = 0.15
DISTRACTOR_NOISE_STD = 0.12
BUMP_HEIGHT = 1.2
BUMP_WIDTH = 3

WAVELENGTH_START = 400.0
WAVELENGTH_STEP = 25.0


@dataclass(frozen=True)
class SynthConfig:
    """Knobs of the generator; defaults give the benchmark dataset."""

    n_wafers: int = 200
    n_channels: int = 11
    ticks: int = 57
    stage_split_tick: int = 20
    jitter_max: int = 3
    noise_std: float = 0.02 * PLATEAU_GAP
    tail_effect: float = 0.25
    seed: int = 1
    signal_channels: tuple[int, ...] = (0,)

    def __post_init__(self) -> None:
        object.__setattr__(self, "signal_channels", tuple(int(c) for c in self.signal_channels))
        if self.n_wafers < 1:
            raise ValueError(f"n_wafers must be >= 1, got {self.n_wafers}")
        if self.n_channels < 1:
            raise ValueError(f"n_channels must be >= 1, got {self.n_channels}")
        if not 4 <= self.stage_split_tick <= self.ticks - 4:
            raise ValueError(
                f"stage_split_tick must be in [4, ticks-4] = [4, {self.ticks - 4}], "
                f"got {self.stage_split_tick}"
            )
        if not 0 <= self.jitter_max < self.stage_split_tick:
            raise ValueError(
                f"jitter_max must be in [0, stage_split_tick) = "
                f"[0, {self.stage_split_tick}), got {self.jitter_max}"
            )
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be >= 0, got {self.noise_std}")
        for c in self.signal_channels:
            if not 0 <= c < self.n_channels:
                raise ValueError(f"signal channel index {c} out of range [0, {self.n_channels})")

    @property
    def tail_length(self) -> int:
        stage2 = self.ticks - self.stage_split_tick
        return max(3, round(TAIL_FRACTION * stage2))

    @property
    def ramp_length(self) -> int:
        return max(2, round(RAMP_FRACTION * self.tail_length))

    @property
    def wavelengths(self) -> tuple[float, ...]:
        return tuple(WAVELENGTH_START + WAVELENGTH_STEP * c for c in range(self.n_channels))


def generate(cfg: SynthConfig) -> Dataset:
    """Generate a dataset with the planted tail-slope/etch-rate coupling."""
    rng = np.random.default_rng(cfg.seed)
    ticks = cfg.ticks
    split = cfg.stage_split_tick
    tail_start = ticks - cfg.tail_length
    ramp = cfg.ramp_length
    signal = set(cfg.signal_channels)
    wavelengths = cfg.wavelengths
    id_width = max(4, len(str(cfg.n_wafers - 1)))

    bump_lo = split + 3
    bump_hi = tail_start - BUMP_WIDTH - 3
    t_axis = np.arange(ticks)
    # Descent profile: 0 before the tail, then k/ramp up to 1, flat 1 after.
    descent = np.clip((t_axis - tail_start + 1) / ramp, 0.0, 1.0)

    wafers = []
    for idx in range(cfg.n_wafers):
        u = rng.uniform(-1.0, 1.0)
        rate_eps = rng.normal(0.0, RATE_NOISE_STD)
        shift = int(rng.integers(-cfg.jitter_max, cfg.jitter_max + 1))
        slope = SLOPE_BASE + cfg.tail_effect * u
        rate = RATE_BASE + RATE_COUPLING * cfg.tail_effect * u + rate_eps
        if rate <= 0:
            raise ValueError(
                f"generated etch_rate {rate} <= 0; reduce tail_effect or rate noise"
            )

        channels = {}
        for c, wl in enumerate(wavelengths):
            level1 = STAGE1_BASE + STAGE1_CHANNEL_STEP * c
            level2 = level1 + PLATEAU_GAP + rng.normal(
                0.0, STAGE2_WOBBLE_FACTOR * cfg.noise_std
            )
            if c in signal:
                chan_slope = slope
            else:
                chan_slope = SLOPE_BASE
                level2 += DISTRACTOR_COUPLING * (rate - RATE_BASE)
                level2 += rng.normal(0.0, DISTRACTOR_NOISE_STD)

            profile = np.where(t_axis < split, level1, level2).astype(float)
            profile -= (chan_slope * ramp) * descent
            if c not in signal and bump_hi >= bump_lo:
                pos = int(rng.integers(bump_lo, bump_hi + 1))
                profile[pos : pos + BUMP_WIDTH] += BUMP_HEIGHT

            shifted = profile[np.clip(t_axis - shift, 0, ticks - 1)]
            noisy = shifted + rng.normal(0.0, cfg.noise_std, size=ticks)
            channels[wl] = ChannelSeries(wl, tuple(float(v) for v in noisy))

        wafers.append(WaferRecord(f"W{idx:0{id_width}d}", channels, float(rate)))

    wafers.sort(key=lambda w: w.wafer_id)
    return Dataset(tuple(wafers), wavelengths, meta=describe(cfg))


def describe(cfg: SynthConfig) -> dict:
    """Provenance record written to the dataset's meta sidecar."""
    return {
        "generator": "etchwarp.synth",
        "generator_version": GENERATOR_VERSION,
        "prng": PRNG_NAME,
        "numpy_version": np.__version__,
        "config": asdict(cfg),
    }


def meta_path(dataset_path: str | Path) -> Path:
    p = Path(dataset_path)
    return p.with_name(p.stem + ".meta.json")


def write_meta(cfg: SynthConfig, dataset_path: str | Path) -> Path:
    out = meta_path(dataset_path)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(describe(cfg), fh, indent=1)
        fh.write("\n")
    return out
