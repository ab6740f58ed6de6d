"""Case-based insight tooling: neighbor rankings and alignment exports.

Explanations are single-channel: a wafer is compared against every other
wafer with banded DTW on one wavelength, and an alignment can be dumped as
CSV for plotting or aggregated into per-region cost contributions that
localize where two wafers differ.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .core import Dataset, DataError
from .dtw import DtwOutcome, DtwParams, dtw_align, dtw_distance


@dataclass(frozen=True)
class NeighborEntry:
    wafer_id: str
    distance: float
    etch_rate: float


@dataclass(frozen=True)
class NeighborReport:
    """All non-query wafers ranked by single-channel DTW distance."""

    query_id: str
    channel: float
    window: int
    ranked: tuple[NeighborEntry, ...]

    @property
    def nearest(self) -> NeighborEntry:
        return self.ranked[0]

    @property
    def furthest(self) -> NeighborEntry:
        return self.ranked[-1]

    def to_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "channel": self.channel,
            "window": self.window,
            "nearest": self.nearest.wafer_id,
            "furthest": self.furthest.wafer_id,
            "ranked": [
                {"wafer_id": e.wafer_id, "distance": e.distance, "etch_rate": e.etch_rate}
                for e in self.ranked
            ],
        }


def neighbor_report(
    ds: Dataset, query_id: str, channel: float, params: DtwParams
) -> NeighborReport:
    """Rank every other wafer by DTW distance to the query on one channel."""
    query = ds.wafer(query_id)
    q_samples = query.series(channel).samples
    entries = []
    for w in ds.wafers:
        if w.wafer_id == query_id:
            continue
        d = dtw_distance(q_samples, w.series(channel).samples, params)
        entries.append(NeighborEntry(w.wafer_id, d, w.etch_rate))
    if not entries:
        raise DataError("neighbor report needs at least 2 wafers")
    entries.sort(key=lambda e: (e.distance, e.wafer_id))
    return NeighborReport(query_id, float(channel), params.window, tuple(entries))


def write_neighbor_report(report: NeighborReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=1)
        fh.write("\n")


def align_wafers(
    ds: Dataset, query_id: str, other_id: str, channel: float, params: DtwParams
) -> DtwOutcome:
    a = ds.wafer(query_id).series(channel).samples
    b = ds.wafer(other_id).series(channel).samples
    return dtw_align(a, b, params)


def export_alignment(
    ds: Dataset,
    query_id: str,
    other_id: str,
    channel: float,
    params: DtwParams,
    path: str | Path,
) -> DtwOutcome:
    """Write the warping path as CSV: step,i,j,query_value,other_value,step_cost.

    A leading comment line records the distance and window so the file is
    self-describing for downstream plotting.
    """
    query = ds.wafer(query_id).series(channel).samples
    other = ds.wafer(other_id).series(channel).samples
    outcome = dtw_align(query, other, params)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(
            f"# query={query_id} other={other_id} channel={channel!r} "
            f"window={params.window} distance={outcome.distance!r}\n"
        )
        fh.write("step,i,j,query_value,other_value,step_cost\n")
        for s, ((i, j), cost) in enumerate(zip(outcome.path, outcome.step_costs)):
            fh.write(f"{s},{i},{j},{query[i]!r},{other[j]!r},{cost!r}\n")
    return outcome


def region_contributions(
    ds: Dataset,
    query_id: str,
    other_id: str,
    channel: float,
    params: DtwParams,
    n_regions: int,
) -> list[tuple[tuple[int, int], float]]:
    """Summed step costs per contiguous region of query ticks.

    The query's ticks [0, n) are partitioned into ``n_regions`` near-equal
    ranges; each path step is attributed to the region of its query index i
    (steps advancing only j land in the current i's region). The region
    sums add up to the squared DTW distance.
    """
    query = ds.wafer(query_id).series(channel)
    n = len(query)
    if not 1 <= n_regions <= n:
        raise ValueError(f"n_regions must be in [1, {n}], got {n_regions}")
    outcome = align_wafers(ds, query_id, other_id, channel, params)

    base, rem = divmod(n, n_regions)
    bounds = []
    start = 0
    for r in range(n_regions):
        size = base + (1 if r < rem else 0)
        bounds.append((start, start + size))
        start += size

    sums = [0.0] * n_regions
    region_of = [0] * n
    for r, (lo, hi) in enumerate(bounds):
        for t in range(lo, hi):
            region_of[t] = r
    for (i, _), cost in zip(outcome.path, outcome.step_costs):
        sums[region_of[i]] += cost
    return [(bounds[r], sums[r]) for r in range(n_regions)]
