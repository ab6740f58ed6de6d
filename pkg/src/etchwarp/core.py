"""Domain types, dataset container, and file I/O shared by every other module.

The normalized on-disk format is a long CSV with one row per
(wafer, wavelength, tick); a JSON convenience format carries the same
content. Both formats round-trip exactly: floats are serialized with
shortest round-trip precision, wafers are sorted by id on load, and ticks
are re-sorted per channel, so loading the same file twice yields identical
datasets.

``sample_rate_hz`` is an in-memory annotation (the spectrometer's sampling
rate); neither file format persists it, so round-trip identity holds for
datasets carrying the default rate.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

LONG_CSV_HEADER = ["wafer_id", "etch_rate", "wavelength_nm", "tick", "intensity"]

DEFAULT_SAMPLE_RATE_HZ = 1.3


class DataError(ValueError):
    """Raised for parse failures and dataset invariant violations."""


@dataclass(frozen=True)
class ChannelSeries:
    """One wavelength's intensity-vs-time samples for one wafer."""

    wavelength_nm: float
    samples: tuple[float, ...]
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ

    def __post_init__(self) -> None:
        object.__setattr__(self, "wavelength_nm", float(self.wavelength_nm))
        object.__setattr__(self, "samples", tuple(float(v) for v in self.samples))
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))
        if not self.wavelength_nm > 0:
            raise DataError(f"wavelength_nm must be positive, got {self.wavelength_nm}")
        if not self.sample_rate_hz > 0:
            raise DataError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if len(self.samples) == 0:
            raise DataError(f"channel {self.wavelength_nm} has no samples")
        for t, v in enumerate(self.samples):
            if not math.isfinite(v):
                raise DataError(
                    f"non-finite intensity at wavelength {self.wavelength_nm}, tick {t}"
                )

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class WaferRecord:
    """One processed wafer: its per-wavelength series and measured etch rate."""

    wafer_id: str
    channels: dict[float, ChannelSeries]
    etch_rate: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "etch_rate", float(self.etch_rate))
        if not self.wafer_id:
            raise DataError("wafer_id must be a non-empty string")
        if not math.isfinite(self.etch_rate) or self.etch_rate <= 0:
            raise DataError(f"wafer {self.wafer_id}: etch_rate must be positive")
        if not self.channels:
            raise DataError(f"wafer {self.wafer_id} has no channels")
        lengths = set()
        for wl, series in self.channels.items():
            if float(wl) != series.wavelength_nm:
                raise DataError(
                    f"wafer {self.wafer_id}: channel key {wl} does not match "
                    f"series wavelength {series.wavelength_nm}"
                )
            lengths.add(len(series))
        if len(lengths) > 1:
            # One spectrometer frame yields all wavelengths at once, so
            # within a wafer every channel must have the same tick count.
            raise DataError(
                f"wafer {self.wafer_id}: channels have unequal lengths {sorted(lengths)}"
            )

    def series(self, wavelength_nm: float) -> ChannelSeries:
        try:
            return self.channels[float(wavelength_nm)]
        except KeyError:
            raise DataError(
                f"wafer {self.wafer_id} has no channel at wavelength {wavelength_nm}"
            ) from None


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of wafers sharing one wavelength key set.

    ``channel_order`` is the evaluation order of channels; loaders set it to
    the sorted wavelength list.
    """

    wafers: tuple[WaferRecord, ...]
    channel_order: tuple[float, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "wafers", tuple(self.wafers))
        object.__setattr__(self, "channel_order", tuple(float(w) for w in self.channel_order))
        if not self.wafers:
            raise DataError("dataset must contain at least one wafer")
        if not self.channel_order:
            raise DataError("channel_order must be non-empty")
        if len(set(self.channel_order)) != len(self.channel_order):
            raise DataError("channel_order contains duplicate wavelengths")
        seen: set[str] = set()
        for w in self.wafers:
            if w.wafer_id in seen:
                raise DataError(f"duplicate wafer_id {w.wafer_id!r}")
            seen.add(w.wafer_id)
        all_keys = set()
        for w in self.wafers:
            all_keys.update(w.channels.keys())
        for w in self.wafers:
            missing = all_keys - set(w.channels.keys())
            if missing:
                wl = min(missing)
                raise DataError(
                    f"wafer {w.wafer_id} lacks channel at wavelength {wl} "
                    f"present in other wafers"
                )
        for wl in self.channel_order:
            if wl not in all_keys:
                raise DataError(f"channel_order wavelength {wl} not present in wafers")

    def __len__(self) -> int:
        return len(self.wafers)

    def wafer(self, wafer_id: str) -> WaferRecord:
        for w in self.wafers:
            if w.wafer_id == wafer_id:
                return w
        raise DataError(f"unknown wafer_id {wafer_id!r}")

    @property
    def wafer_ids(self) -> tuple[str, ...]:
        return tuple(w.wafer_id for w in self.wafers)

    @property
    def etch_rates(self) -> tuple[float, ...]:
        return tuple(w.etch_rate for w in self.wafers)


def infer_format(path: str | Path) -> str:
    return "json" if Path(path).suffix.lower() == ".json" else "long-csv"


def load_dataset(path: str | Path, format: str | None = None) -> Dataset:
    """Load a dataset from ``path`` in ``long-csv`` or ``json`` format.

    Wafers are sorted by wafer_id and per-channel samples by tick index, so
    loading is deterministic regardless of row order in the file.
    """
    path = Path(path)
    fmt = format or infer_format(path)
    if fmt == "long-csv":
        return _load_long_csv(path)
    if fmt == "json":
        return _load_json(path)
    raise DataError(f"unknown dataset format {fmt!r} (expected 'long-csv' or 'json')")


def save_dataset(ds: Dataset, path: str | Path, format: str | None = None) -> None:
    """Write ``ds`` to ``path``; ``load_dataset`` reproduces it exactly."""
    path = Path(path)
    fmt = format or infer_format(path)
    if fmt == "long-csv":
        _save_long_csv(ds, path)
    elif fmt == "json":
        _save_json(ds, path)
    else:
        raise DataError(f"unknown dataset format {fmt!r} (expected 'long-csv' or 'json')")


def _load_long_csv(path: Path) -> Dataset:
    # raw[wafer_id] = (etch_rate, {wavelength: {tick: intensity}})
    raw: dict[str, tuple[float, dict[float, dict[int, float]]]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header != LONG_CSV_HEADER:
            raise DataError(
                f"{path}:1: bad header {header!r}, expected {','.join(LONG_CSV_HEADER)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise DataError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
            wid, rate_s, wl_s, tick_s, val_s = row
            try:
                rate = float(rate_s)
                wl = float(wl_s)
                tick = int(tick_s)
                val = float(val_s)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            if tick < 0:
                raise DataError(f"{path}:{lineno}: tick must be >= 0, got {tick}")
            if not math.isfinite(val):
                raise DataError(
                    f"{path}:{lineno}: non-finite intensity for wafer {wid}, "
                    f"wavelength {wl}, tick {tick}"
                )
            if wid not in raw:
                raw[wid] = (rate, {})
            elif raw[wid][0] != rate:
                raise DataError(
                    f"{path}:{lineno}: wafer {wid} has conflicting etch_rate values "
                    f"{raw[wid][0]} and {rate}"
                )
            ticks = raw[wid][1].setdefault(wl, {})
            if tick in ticks:
                raise DataError(
                    f"{path}:{lineno}: duplicate tick {tick} for wafer {wid}, wavelength {wl}"
                )
            ticks[tick] = val
    if not raw:
        raise DataError(f"{path}: no data rows")
    return _assemble(raw, origin=str(path))


def _load_json(path: Path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(doc, dict) or "wafers" not in doc:
        raise DataError(f"{path}: expected a top-level object with a 'wafers' list")
    raw: dict[str, tuple[float, dict[float, dict[int, float]]]] = {}
    for i, entry in enumerate(doc["wafers"]):
        try:
            wid = str(entry["wafer_id"])
            rate = float(entry["etch_rate"])
            channels = entry["channels"]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}: wafer entry {i}: {exc}") from None
        if wid in raw:
            raise DataError(f"{path}: duplicate wafer_id {wid!r}")
        chan_ticks: dict[float, dict[int, float]] = {}
        for wl_s, values in channels.items():
            wl = float(wl_s)
            ticks: dict[int, float] = {}
            for t, v in enumerate(values):
                v = float(v)
                if not math.isfinite(v):
                    raise DataError(
                        f"{path}: non-finite intensity for wafer {wid}, "
                        f"wavelength {wl}, tick {t}"
                    )
                ticks[t] = v
            chan_ticks[wl] = ticks
        raw[wid] = (rate, chan_ticks)
    if not raw:
        raise DataError(f"{path}: no wafers")
    return _assemble(raw, origin=str(path))


def _assemble(
    raw: Mapping[str, tuple[float, dict[float, dict[int, float]]]], origin: str
) -> Dataset:
    all_wls: set[float] = set()
    for _, chans in raw.values():
        all_wls.update(chans.keys())
    wafers = []
    for wid in sorted(raw):
        rate, chans = raw[wid]
        missing = all_wls - set(chans.keys())
        if missing:
            raise DataError(
                f"{origin}: wafer {wid} lacks channel at wavelength {min(missing)}"
            )
        series = {}
        for wl in sorted(chans):
            ticks = chans[wl]
            expected = range(len(ticks))
            if sorted(ticks) != list(expected):
                raise DataError(
                    f"{origin}: wafer {wid}, wavelength {wl}: ticks are not "
                    f"contiguous from 0 (got {sorted(ticks)[:5]}...)"
                )
            series[wl] = ChannelSeries(wl, tuple(ticks[t] for t in expected))
        wafers.append(WaferRecord(wid, series, rate))
    return Dataset(tuple(wafers), tuple(sorted(all_wls)))


def _save_long_csv(ds: Dataset, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LONG_CSV_HEADER)
        for w in ds.wafers:
            rate = repr(w.etch_rate)
            for wl in sorted(w.channels):
                series = w.channels[wl]
                wl_s = repr(wl)
                for t, v in enumerate(series.samples):
                    writer.writerow([w.wafer_id, rate, wl_s, t, repr(v)])


def _save_json(ds: Dataset, path: Path) -> None:
    doc = {
        "wafers": [
            {
                "wafer_id": w.wafer_id,
                "etch_rate": w.etch_rate,
                "channels": {
                    repr(wl): list(w.channels[wl].samples) for wl in sorted(w.channels)
                },
            }
            for w in ds.wafers
        ]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def dataset_from_wafers(wafers: Iterable[WaferRecord]) -> Dataset:
    """Build a canonical Dataset: wafers sorted by id, channels sorted."""
    ws = tuple(sorted(wafers, key=lambda w: w.wafer_id))
    if not ws:
        raise DataError("dataset must contain at least one wafer")
    wls = sorted({wl for w in ws for wl in w.channels})
    return Dataset(ws, tuple(wls))
