"""Shared test helpers: independent oracles and small dataset builders."""

from __future__ import annotations

import math

import numpy as np
import pytest

from etchwarp.core import ChannelSeries, Dataset, WaferRecord


def brute_force_dtw(a, b, window):
    """Exhaustive minimum over all monotone banded warping paths.

    Walks every path from (0, 0) to (n-1, m-1) built from the three unit
    steps, restricted to |i - j| <= max(window, |n - m|), accumulating
    squared differences. Deliberately has no memoization or recurrence in
    common with the production implementation.
    """
    n, m = len(a), len(b)
    w = max(window, abs(n - m))
    cost = [[(a[i] - b[j]) ** 2 for j in range(m)] for i in range(n)]
    best = math.inf
    # DFS over path prefixes: (i, j, accumulated cost incl. cell (i, j)).
    stack = [(0, 0, cost[0][0])]
    while stack:
        i, j, acc = stack.pop()
        if i == n - 1 and j == m - 1:
            if acc < best:
                best = acc
            continue
        i1 = i + 1
        j1 = j + 1
        if i1 < n and abs(i1 - j) <= w:
            stack.append((i1, j, acc + cost[i1][j]))
        if j1 < m and abs(i - j1) <= w:
            stack.append((i, j1, acc + cost[i][j1]))
        if i1 < n and j1 < m and abs(i1 - j1) <= w:
            stack.append((i1, j1, acc + cost[i1][j1]))
    return math.sqrt(best)


def make_wafer(wafer_id, rate, channels):
    """channels: {wavelength: sample list}."""
    series = {
        float(wl): ChannelSeries(float(wl), tuple(float(v) for v in vals))
        for wl, vals in channels.items()
    }
    return WaferRecord(wafer_id, series, rate)


def make_dataset(spec):
    """spec: {wafer_id: (rate, {wavelength: samples})}, canonical order."""
    wafers = tuple(
        make_wafer(wid, rate, chans) for wid, (rate, chans) in sorted(spec.items())
    )
    wls = tuple(sorted({wl for w in wafers for wl in w.channels}))
    return Dataset(wafers, wls)


@pytest.fixture
def tiny_dataset():
    return make_dataset(
        {
            "A": (10.0, {400: [1, 1, 5, 5, 5, 4], 500: [2, 2, 6, 6, 6, 5]}),
            "B": (12.0, {400: [1, 1, 1, 5, 5, 4], 500: [2, 2, 2, 6, 6, 5]}),
            "C": (20.0, {400: [1, 2, 5, 7, 7, 2], 500: [2, 3, 6, 8, 8, 3]}),
            "D": (16.0, {400: [0, 1, 4, 6, 6, 3], 500: [1, 2, 5, 7, 7, 4]}),
        }
    )


def random_series(rng: np.random.Generator, lo=1, hi=60):
    n = int(rng.integers(lo, hi + 1))
    return list(rng.normal(0.0, 1.0, size=n))
