"""Two-stage aggregate summary of a channel: the four-metric representation.

A channel series is split into two stages at a detected (or caller-fixed)
changepoint; each stage is summarized by its mean and population standard
deviation, giving four numbers per channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from .core import ChannelSeries, WaferRecord

SplitPolicy = Union[str, int]  # "auto" or a fixed split tick


@dataclass(frozen=True)
class FourMetrics:
    """Stage-wise mean and population std, plus the split tick used."""

    mean1: float
    std1: float
    mean2: float
    std2: float
    split_index: int


def detect_stage_split(s: ChannelSeries | Sequence[float]) -> int:
    """Split tick maximizing the between-stage mean gap.

    Candidate splits t are restricted to the middle 60% of ticks
    (n < 5t < 4n, integer arithmetic so the boundary is exact); ties break
    toward the smallest t. Needs at least 4 samples.
    """
    samples = s.samples if isinstance(s, ChannelSeries) else tuple(float(v) for v in s)
    n = len(samples)
    if n < 4:
        raise ValueError(f"need at least 4 samples to split a series, got {n}")
    total = math.fsum(samples)
    best_t = -1
    best_gap = -1.0
    left = 0.0
    for t in range(1, n):
        left += samples[t - 1]
        if 5 * t <= n or 5 * t >= 4 * n:
            continue
        gap = abs(left / t - (total - left) / (n - t))
        if gap > best_gap:
            best_gap = gap
            best_t = t
    return best_t


def four_metrics(s: ChannelSeries | Sequence[float], split_index: int) -> FourMetrics:
    """Mean/std over [0, split) and [split, n); std divides by segment length."""
    samples = s.samples if isinstance(s, ChannelSeries) else tuple(float(v) for v in s)
    n = len(samples)
    if not 1 <= split_index <= n - 1:
        raise ValueError(f"split_index {split_index} out of range [1, {n - 1}]")
    m1, s1 = _mean_std(samples[:split_index])
    m2, s2 = _mean_std(samples[split_index:])
    return FourMetrics(m1, s1, m2, s2, split_index)


def _mean_std(seg: Sequence[float]) -> tuple[float, float]:
    n = len(seg)
    mean = math.fsum(seg) / n
    var = math.fsum((v - mean) ** 2 for v in seg) / n
    return mean, math.sqrt(var)


def resolve_split(policy: SplitPolicy, s: ChannelSeries) -> int:
    if policy == "auto":
        return detect_stage_split(s)
    t = int(policy)
    if not 1 <= t <= len(s) - 1:
        raise ValueError(
            f"fixed split {t} out of range [1, {len(s) - 1}] for a "
            f"{len(s)}-tick series at wavelength {s.wavelength_nm}"
        )
    return t


def featurize_wafer(
    w: WaferRecord,
    channels: Sequence[float],
    split_policy: SplitPolicy = "auto",
) -> list[float]:
    """Concatenated (mean1, std1, mean2, std2) blocks, one per channel in order."""
    out: list[float] = []
    for wl in channels:
        series = w.series(wl)
        fm = four_metrics(series, resolve_split(split_policy, series))
        out.extend((fm.mean1, fm.std1, fm.mean2, fm.std2))
    return out


def feature_names(channels: Sequence[float]) -> list[str]:
    names = []
    for wl in channels:
        wl_s = repr(float(wl))
        names.extend(
            (f"{wl_s}_mean1", f"{wl_s}_std1", f"{wl_s}_mean2", f"{wl_s}_std2")
        )
    return names
