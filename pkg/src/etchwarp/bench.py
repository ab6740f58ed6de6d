"""Cross-validated MAPE benchmark harness.

Two experiment shapes are provided: ``run_comparison`` evaluates the three
predictors over growing channel-count prefixes under one shared fold plan,
and ``sweep_parameter`` varies a single model knob (neighborhood size k, or
DTW window) on a single channel.

Pairwise DTW distances are pure functions of wafer pairs, so the harness
precomputes one symmetric distance matrix per (channel, window) and reuses
it across folds and channel counts; predictions are bit-identical to
calling the model functions directly. Reports serialize to JSON (full) and
CSV (flat per-fold rows plus a summary) without wall-clock content, so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Dataset
from .dtw import _banded_distance
from .models import (
    MODEL_NAMES,
    ModelConfig,
    feature_distances,
    feature_matrix,
    knn_regress,
    ols_fit,
    ols_predict,
    standardization,
)

FEATURE_STANDARDIZATION_NOTE = (
    "4M features standardized per training fold (z-score, population std; "
    "zero-variance columns standardized to zero)"
)


def mape(y_true: Sequence[float], y_pred: Sequence[float]) -> float:
    """Mean absolute percentage error, as a percentage."""
    t = np.asarray(y_true, dtype=float)
    p = np.asarray(y_pred, dtype=float)
    if t.shape != p.shape or t.ndim != 1:
        raise ValueError(f"length mismatch: y_true {t.shape} vs y_pred {p.shape}")
    if t.size == 0:
        raise ValueError("MAPE of an empty vector is undefined")
    if (t == 0).any():
        raise ValueError("MAPE undefined: y_true contains a zero value")
    return float(100.0 * np.mean(np.abs(t - p) / np.abs(t)))


@dataclass(frozen=True)
class FoldPlan:
    """Deterministic shuffled partition of {0..n-1} into near-equal folds."""

    n: int
    folds: tuple[tuple[int, ...], ...]
    seed: int

    @property
    def fold_count(self) -> int:
        return len(self.folds)

    def train_indices(self, fold: int) -> tuple[int, ...]:
        test = set(self.folds[fold])
        return tuple(i for i in range(self.n) if i not in test)

    def digest(self) -> str:
        payload = json.dumps(
            {"n": self.n, "seed": self.seed, "folds": [list(f) for f in self.folds]}
        )
        return hashlib.sha256(payload.encode()).hexdigest()


def kfold_plan(n: int, fold_count: int, seed: int) -> FoldPlan:
    if fold_count < 1:
        raise ValueError(f"fold_count must be >= 1, got {fold_count}")
    if fold_count > n:
        raise ValueError(f"fold_count {fold_count} exceeds dataset size {n}")
    perm = np.random.default_rng(seed).permutation(n)
    base, rem = divmod(n, fold_count)
    folds = []
    start = 0
    for f in range(fold_count):
        size = base + (1 if f < rem else 0)
        folds.append(tuple(sorted(int(i) for i in perm[start : start + size])))
        start += size
    return FoldPlan(n, tuple(folds), seed)


@dataclass(frozen=True)
class BenchCell:
    """Fold MAPEs of one model at one x value (channel count or parameter)."""

    model: str
    x: int
    fold_mapes: tuple[float, ...]
    mape_mean: float
    mape_std: float


@dataclass(frozen=True)
class BenchReport:
    kind: str  # "comparison" or "sweep"
    x_label: str  # "channel_count", "k", or "window"
    cells: tuple[BenchCell, ...]
    config: dict

    def cell(self, model: str, x: int) -> BenchCell:
        for c in self.cells:
            if c.model == model and c.x == x:
                return c
        raise KeyError(f"no cell for model={model!r}, x={x}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "x_label": self.x_label,
            "config": self.config,
            "cells": [
                {
                    "model": c.model,
                    "x": c.x,
                    "fold_mapes": list(c.fold_mapes),
                    "mape_mean": c.mape_mean,
                    "mape_std": c.mape_std,
                }
                for c in self.cells
            ],
        }


class DistanceCache:
    """Per-(channel, window) pairwise DTW distance matrices for one dataset."""

    def __init__(self, ds: Dataset, jobs: int = 1):
        self.n = len(ds)
        self.jobs = max(1, int(jobs))
        self._samples = {
            wl: [list(w.channels[wl].samples) for w in ds.wafers]
            for wl in ds.channel_order
        }
        self._mats: dict[tuple[float, int], np.ndarray] = {}

    def ensure(self, wavelengths: Sequence[float], window: int) -> None:
        missing = [wl for wl in wavelengths if (wl, window) not in self._mats]
        if not missing:
            return
        tasks = [(self._samples[wl], window) for wl in missing]
        if self.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                results = list(pool.map(_pairwise_condensed, tasks))
        else:
            results = [_pairwise_condensed(t) for t in tasks]
        for wl, condensed in zip(missing, results):
            self._mats[(wl, window)] = _condensed_to_square(condensed, self.n)

    def matrix(self, wavelength: float, window: int) -> np.ndarray:
        self.ensure([wavelength], window)
        return self._mats[(wavelength, window)]


def _pairwise_condensed(task: tuple[list[list[float]], int]) -> list[float]:
    series, window = task
    n = len(series)
    out = []
    for i in range(n):
        si = series[i]
        for j in range(i + 1, n):
            out.append(_banded_distance(si, series[j], window))
    return out


def _condensed_to_square(condensed: Sequence[float], n: int) -> np.ndarray:
    mat = np.zeros((n, n))
    it = iter(condensed)
    for i in range(n):
        for j in range(i + 1, n):
            v = next(it)
            mat[i, j] = v
            mat[j, i] = v
    return mat


def _fold_mapes_knn_dtw(dist, y, ids, plan, k, weighting):
    out = []
    for f, test_idx in enumerate(plan.folds):
        train_idx = list(plan.train_indices(f))
        assert not set(train_idx) & set(test_idx)
        train_ids = [ids[i] for i in train_idx]
        train_y = y[train_idx]
        preds = [
            knn_regress(dist[t, train_idx], train_y, train_ids, k, weighting)
            for t in test_idx
        ]
        out.append(mape(y[list(test_idx)], preds))
    return out


def _fold_mapes_knn_4m(F, y, ids, plan, k, weighting):
    out = []
    for f, test_idx in enumerate(plan.folds):
        train_idx = list(plan.train_indices(f))
        assert not set(train_idx) & set(test_idx)
        means, stds = standardization(F[train_idx])
        Z = (F[train_idx] - means) / stds
        train_ids = [ids[i] for i in train_idx]
        train_y = y[train_idx]
        preds = []
        for t in test_idx:
            qz = (F[t] - means) / stds
            preds.append(
                knn_regress(feature_distances(Z, qz), train_y, train_ids, k, weighting)
            )
        out.append(mape(y[list(test_idx)], preds))
    return out


def _fold_mapes_r4m(F, y, plan):
    out = []
    for f, test_idx in enumerate(plan.folds):
        train_idx = list(plan.train_indices(f))
        assert not set(train_idx) & set(test_idx)
        fit = ols_fit(F[train_idx], y[train_idx])
        preds = [ols_predict(fit, F[t]) for t in test_idx]
        out.append(mape(y[list(test_idx)], preds))
    return out


def _cell(model: str, x: int, fold_mapes: Sequence[float]) -> BenchCell:
    arr = np.asarray(fold_mapes, dtype=float)
    return BenchCell(
        model=model,
        x=int(x),
        fold_mapes=tuple(float(v) for v in arr),
        mape_mean=float(arr.mean()),
        mape_std=float(arr.std()),
    )


def rank_channels(
    ds: Dataset, cfg: ModelConfig, plan: FoldPlan, cache: DistanceCache
) -> tuple[list[dict], tuple[float, ...]]:
    """Rank channels by single-channel knn-dtw MAPE, best first.

    The ranked order stands in for the domain-expert channel selection: the
    comparison's "first c channels" are prefixes of this list. Ties break
    by ascending wavelength.
    """
    y = np.asarray(ds.etch_rates)
    ids = ds.wafer_ids
    cache.ensure(ds.channel_order, cfg.window)
    scored = []
    for wl in ds.channel_order:
        fold_mapes = _fold_mapes_knn_dtw(
            cache.matrix(wl, cfg.window), y, ids, plan, cfg.k, cfg.weighting
        )
        scored.append((float(np.mean(fold_mapes)), wl))
    scored.sort()
    ranking = [{"wavelength": wl, "mape_mean": m} for m, wl in scored]
    return ranking, tuple(wl for _, wl in scored)


def _config_echo(ds: Dataset, cfg: ModelConfig, plan: FoldPlan, seed: int) -> dict:
    from . import __version__

    return {
        "tool_version": __version__,
        "n_wafers": len(ds),
        "k": cfg.k,
        "window": cfg.window,
        "split_policy": cfg.split_policy,
        "weighting": cfg.weighting,
        "seed": seed,
        "fold_count": plan.fold_count,
        "fold_sizes": [len(f) for f in plan.folds],
        "fold_plan_hash": plan.digest(),
        "shared_folds": True,
        "feature_standardization": FEATURE_STANDARDIZATION_NOTE,
    }


def run_comparison(
    ds: Dataset,
    cfg: ModelConfig,
    max_channels: int | None = None,
    fold_count: int = 10,
    seed: int = 0,
    models: Sequence[str] | None = None,
    jobs: int = 1,
) -> BenchReport:
    """Evaluate the three models over channel-count prefixes 1..max_channels.

    All models and channel counts share one fold plan. When ``cfg.channels``
    is unset, the evaluation order is the single-channel knn-dtw ranking
    (recorded in the report); otherwise ``cfg.channels`` is used as given.
    """
    models = tuple(models) if models is not None else MODEL_NAMES
    for m in models:
        if m not in MODEL_NAMES:
            raise ValueError(f"unknown model {m!r}; expected one of {MODEL_NAMES}")
    plan = kfold_plan(len(ds), fold_count, seed)
    cache = DistanceCache(ds, jobs)

    ranking = None
    if cfg.channels is not None:
        order = cfg.channels
    else:
        try:
            ranking, order = rank_channels(ds, cfg, plan, cache)
        except Exception as exc:
            raise RuntimeError(
                f"channel ranking (single-channel knn-dtw) failed: {exc}"
            ) from exc
    if max_channels is None:
        max_channels = len(order)
    if not 1 <= max_channels <= len(order):
        raise ValueError(
            f"max_channels must be in [1, {len(order)}], got {max_channels}"
        )
    order = order[:max_channels]

    y = np.asarray(ds.etch_rates)
    ids = ds.wafer_ids
    needs_features = "r-4m" in models or "knn-4m" in models
    F = feature_matrix(ds, order, cfg.split_policy) if needs_features else None
    if "knn-dtw" in models:
        cache.ensure(order, cfg.window)

    cells = []
    dtw_total = np.zeros((len(ds), len(ds)))
    for c in range(1, max_channels + 1):
        if "knn-dtw" in models:
            dtw_total = dtw_total + cache.matrix(order[c - 1], cfg.window)
        Fc = F[:, : 4 * c] if F is not None else None
        for model in models:
            try:
                if model == "r-4m":
                    fold_mapes = _fold_mapes_r4m(Fc, y, plan)
                elif model == "knn-4m":
                    fold_mapes = _fold_mapes_knn_4m(
                        Fc, y, ids, plan, cfg.k, cfg.weighting
                    )
                else:
                    fold_mapes = _fold_mapes_knn_dtw(
                        dtw_total, y, ids, plan, cfg.k, cfg.weighting
                    )
            except Exception as exc:
                raise RuntimeError(
                    f"model {model} failed at channel count {c}: {exc}"
                ) from exc
            cells.append(_cell(model, c, fold_mapes))

    config = _config_echo(ds, cfg, plan, seed)
    config["models"] = list(models)
    config["max_channels"] = max_channels
    config["channels"] = list(order)
    config["channel_ranking"] = ranking
    return BenchReport("comparison", "channel_count", tuple(cells), config)


def sweep_parameter(
    ds: Dataset,
    cfg: ModelConfig,
    parameter: str,
    values: Sequence[int],
    fold_count: int = 10,
    seed: int = 0,
    jobs: int = 1,
) -> BenchReport:
    """Sweep k (knn-4m) or window (knn-dtw) on a single channel.

    The channel is the first of ``cfg.channels`` (or of the dataset's
    channel order), matching the single-wavelength parameter studies.
    """
    if parameter not in ("k", "window"):
        raise ValueError(f"parameter must be 'k' or 'window', got {parameter!r}")
    values = [int(v) for v in values]
    if not values:
        raise ValueError("values must be non-empty")
    for v in values:
        if parameter == "k" and v < 1:
            raise ValueError(f"invalid k value {v}: must be >= 1")
        if parameter == "window" and v < 0:
            raise ValueError(f"invalid window value {v}: must be >= 0")

    channel = cfg.resolve_channels(ds)[0]
    plan = kfold_plan(len(ds), fold_count, seed)
    y = np.asarray(ds.etch_rates)
    ids = ds.wafer_ids

    cells = []
    if parameter == "k":
        model = "knn-4m"
        F = feature_matrix(ds, (channel,), cfg.split_policy)
        for v in values:
            try:
                fold_mapes = _fold_mapes_knn_4m(F, y, ids, plan, v, cfg.weighting)
            except Exception as exc:
                raise RuntimeError(f"model {model} failed at k={v}: {exc}") from exc
            cells.append(_cell(model, v, fold_mapes))
    else:
        model = "knn-dtw"
        cache = DistanceCache(ds, jobs)
        for v in values:
            try:
                fold_mapes = _fold_mapes_knn_dtw(
                    cache.matrix(channel, v), y, ids, plan, cfg.k, cfg.weighting
                )
            except Exception as exc:
                raise RuntimeError(f"model {model} failed at window={v}: {exc}") from exc
            cells.append(_cell(model, v, fold_mapes))

    config = _config_echo(ds, cfg, plan, seed)
    config["models"] = [model]
    config["parameter"] = parameter
    config["values"] = values
    config["channel"] = channel
    best = min(cells, key=lambda c: (c.mape_mean, c.x))
    config["argmin"] = {"value": best.x, "mape_mean": best.mape_mean}
    return BenchReport("sweep", parameter, tuple(cells), config)


def write_report_json(report: BenchReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=1)
        fh.write("\n")


def write_report_fold_csv(report: BenchReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("model,channel_count_or_param,fold,mape\n")
        for c in report.cells:
            for f, v in enumerate(c.fold_mapes):
                fh.write(f"{c.model},{c.x},{f},{v!r}\n")


def write_report_summary_csv(report: BenchReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("model,x,mape_mean,mape_std\n")
        for c in report.cells:
            fh.write(f"{c.model},{c.x},{c.mape_mean!r},{c.mape_std!r}\n")
