"""Banded dynamic time warping distance and alignment.

The local cost is the squared difference, and the returned distance is the
square root of the accumulated cost, so with window 0 and equal lengths the
distance reduces exactly to the Euclidean distance between the two series.

The band is a Sakoe-Chiba constraint |i - j| <= w_eff with
w_eff = max(window, |len(a) - len(b)|); widening to the length difference
keeps a monotone path feasible when the series lengths differ. Cells
outside the band are unreachable. The distance computation keeps only two
rolling band-width rows, so it touches O(max(n, m) * (2 * w_eff + 1)) cells;
a module-level cell counter exposes the touched-cell total for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, TYPE_CHECKING

if TYPE_CHECKING:
    from .core import WaferRecord

_INF = float("inf")

_cells_touched = 0


def reset_cell_counter() -> None:
    global _cells_touched
    _cells_touched = 0


def cells_touched() -> int:
    """Total band cells visited by distance/alignment calls since last reset."""
    return _cells_touched


@dataclass(frozen=True)
class DtwParams:
    """Warping constraint: maximum |i - j| offset allowed, in ticks."""

    window: int = 1

    def __post_init__(self) -> None:
        if int(self.window) != self.window or self.window < 0:
            raise ValueError(f"window must be a non-negative integer, got {self.window}")
        object.__setattr__(self, "window", int(self.window))


@dataclass(frozen=True)
class DtwOutcome:
    """Alignment result: distance, warping path, and per-step local costs.

    The path runs from (0, 0) to (len(a)-1, len(b)-1) in unit steps that
    increment i, j, or both; ``distance == sqrt(sum(step_costs))``.
    """

    distance: float
    path: tuple[tuple[int, int], ...]
    step_costs: tuple[float, ...]


def effective_window(n: int, m: int, window: int) -> int:
    return max(window, abs(n - m))


def _as_list(x: Sequence[float], name: str) -> list[float]:
    vals = [float(v) for v in x]
    if not vals:
        raise ValueError(f"series {name!r} is empty")
    for v in vals:
        if not math.isfinite(v):
            raise ValueError(f"series {name!r} contains a non-finite value")
    return vals


def dtw_distance(a: Sequence[float], b: Sequence[float], params: DtwParams) -> float:
    """Minimal accumulated squared-difference cost over banded monotone paths."""
    return _banded_distance(_as_list(a, "a"), _as_list(b, "b"), params.window)


def _banded_distance(a: list[float], b: list[float], window: int) -> float:
    global _cells_touched
    n, m = len(a), len(b)
    w = effective_window(n, m, window)
    width = 2 * w + 1

    # Row i is stored band-relative: slot k holds D[i][j] with j = i - w + k.
    prev = [_INF] * width
    cur = [_INF] * width
    cells = 0
    for i in range(n):
        lo = i - w
        if lo < 0:
            lo = 0
        hi = i + w
        if hi > m - 1:
            hi = m - 1
        cells += hi - lo + 1
        ai = a[i]
        base = i - w
        for j in range(lo, hi + 1):
            k = j - base
            d = ai - b[j]
            cost = d * d
            if i == 0 and j == 0:
                cur[k] = cost
                continue
            best = prev[k] if i > 0 else _INF  # diagonal: D[i-1][j-1]
            if i > 0 and k + 1 < width:
                up = prev[k + 1]  # D[i-1][j]
                if up < best:
                    best = up
            if k > 0:
                left = cur[k - 1]  # D[i][j-1]
                if left < best:
                    best = left
            cur[k] = cost + best
        prev, cur = cur, prev
        for k in range(width):
            cur[k] = _INF
    _cells_touched += cells
    return math.sqrt(prev[(m - 1) - (n - 1 - w)])


def dtw_align(a: Sequence[float], b: Sequence[float], params: DtwParams) -> DtwOutcome:
    """Distance plus the warping path realizing it.

    Tie-break during path recovery: diagonal first, then the step advancing
    i, then the step advancing j, so the path is deterministic.
    """
    global _cells_touched
    la = _as_list(a, "a")
    lb = _as_list(b, "b")
    n, m = len(la), len(lb)
    w = effective_window(n, m, params.window)

    acc = [[_INF] * m for _ in range(n)]
    local = [[0.0] * m for _ in range(n)]
    cells = 0
    for i in range(n):
        lo = max(0, i - w)
        hi = min(m - 1, i + w)
        cells += hi - lo + 1
        ai = la[i]
        acc_i = acc[i]
        loc_i = local[i]
        for j in range(lo, hi + 1):
            d = ai - lb[j]
            cost = d * d
            loc_i[j] = cost
            if i == 0 and j == 0:
                acc_i[0] = cost
                continue
            best = acc[i - 1][j - 1] if (i > 0 and j > 0) else _INF
            if i > 0:
                up = acc[i - 1][j]
                if up < best:
                    best = up
            if j > 0:
                left = acc_i[j - 1]
                if left < best:
                    best = left
            acc_i[j] = cost + best
    _cells_touched += cells

    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while i > 0 or j > 0:
        diag = acc[i - 1][j - 1] if (i > 0 and j > 0) else _INF
        up = acc[i - 1][j] if i > 0 else _INF
        left = acc[i][j - 1] if j > 0 else _INF
        if diag <= up and diag <= left:
            i, j = i - 1, j - 1
        elif up <= left:
            i = i - 1
        else:
            j = j - 1
        path.append((i, j))
    path.reverse()
    step_costs = tuple(local[i][j] for i, j in path)
    return DtwOutcome(
        distance=math.sqrt(acc[n - 1][m - 1]),
        path=tuple(path),
        step_costs=step_costs,
    )


def multichannel_distance(
    x: "WaferRecord",
    y: "WaferRecord",
    channels: Sequence[float],
    params: DtwParams,
) -> float:
    """Sum of per-channel DTW distances over the named wavelengths."""
    total = 0.0
    for wl in channels:
        sx = x.series(wl)
        sy = y.series(wl)
        total += _banded_distance(list(sx.samples), list(sy.samples), params.window)
    return total
