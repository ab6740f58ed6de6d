"""The three etch-rate predictors.

* ``r-4m``: ordinary least squares on the four-metric features.
* ``knn-4m``: k-nearest-neighbor regression in standardized feature space.
* ``knn-dtw``: k-nearest-neighbor regression with the summed per-channel
  DTW distance on the raw series.

Features for the 4M models are standardized with training statistics only;
zero-variance columns get std 1 so they standardize to all-zero and drop
out of the distance. Neighbor ties break by ascending wafer_id, making
every prediction deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Dataset, WaferRecord
from .dtw import DtwParams, multichannel_distance
from .features import SplitPolicy, featurize_wafer

MODEL_NAMES = ("r-4m", "knn-4m", "knn-dtw")

INVERSE_DISTANCE_EPS = 1e-9


@dataclass(frozen=True)
class ModelConfig:
    """Shared knobs for the predictors."""

    k: int = 5
    window: int = 1
    channels: tuple[float, ...] | None = None
    split_policy: SplitPolicy = "auto"
    weighting: str = "uniform"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.window < 0:
            raise ValueError(f"window must be >= 0, got {self.window}")
        if self.weighting not in ("uniform", "inverse-distance"):
            raise ValueError(
                f"weighting must be 'uniform' or 'inverse-distance', got {self.weighting!r}"
            )
        if self.channels is not None:
            object.__setattr__(
                self, "channels", tuple(float(w) for w in self.channels)
            )

    def resolve_channels(self, ds: Dataset) -> tuple[float, ...]:
        return self.channels if self.channels is not None else ds.channel_order


@dataclass(frozen=True)
class FittedOls:
    """Least-squares fit on standardized features."""

    coefficients: np.ndarray
    intercept: float
    feature_means: np.ndarray
    feature_stds: np.ndarray


def standardization(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and population stds; zero-variance columns get std 1."""
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds = np.where(stds > 0.0, stds, 1.0)
    return means, stds


def ols_fit(features: np.ndarray | Sequence[Sequence[float]], targets: Sequence[float]) -> FittedOls:
    """Fit least squares via the normal equations on standardized columns.

    If the Gram matrix is singular, retries with a ridge term 1e-8 on the
    diagonal so degenerate designs still yield a usable fit.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(targets, dtype=float)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError(f"features must be a 2-D matrix, got shape {X.shape}")
    n, d = X.shape
    if n < 2:
        raise ValueError(f"need at least 2 training rows, got {n}")
    if y.shape != (n,):
        raise ValueError(f"targets must have length {n}, got shape {y.shape}")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("features and targets must be finite")

    means, stds = standardization(X)
    Z = (X - means) / stds
    intercept = float(y.mean())
    yc = y - intercept
    gram = Z.T @ Z
    rhs = Z.T @ yc
    try:
        coef = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        coef = np.linalg.solve(gram + 1e-8 * np.eye(d), rhs)
    return FittedOls(coef, intercept, means, stds)


def ols_predict(model: FittedOls, features: Sequence[float]) -> float:
    x = np.asarray(features, dtype=float)
    if x.shape != model.feature_means.shape:
        raise ValueError(
            f"feature vector has shape {x.shape}, model expects {model.feature_means.shape}"
        )
    z = (x - model.feature_means) / model.feature_stds
    return model.intercept + float(model.coefficients @ z)


def knn_regress(
    distances: Sequence[float],
    rates: Sequence[float],
    ids: Sequence[str],
    k: int,
    weighting: str = "uniform",
) -> float:
    """Combine the k nearest training rates; ties in distance break by id."""
    n = len(distances)
    if not (len(rates) == len(ids) == n):
        raise ValueError("distances, rates, and ids must have equal lengths")
    if k < 1 or k > n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    order = sorted(range(n), key=lambda i: (distances[i], ids[i]))
    top = order[:k]
    if weighting == "uniform":
        return sum(rates[i] for i in top) / k
    if weighting == "inverse-distance":
        weights = [1.0 / (distances[i] + INVERSE_DISTANCE_EPS) for i in top]
        total = sum(weights)
        return sum(wgt * rates[i] for wgt, i in zip(weights, top)) / total
    raise ValueError(f"unknown weighting {weighting!r}")


def feature_matrix(
    ds: Dataset, channels: Sequence[float], split_policy: SplitPolicy = "auto"
) -> np.ndarray:
    return np.array(
        [featurize_wafer(w, channels, split_policy) for w in ds.wafers], dtype=float
    )


def feature_distances(train_Z: np.ndarray, query_z: np.ndarray) -> np.ndarray:
    return np.sqrt(((train_Z - query_z) ** 2).sum(axis=1))


def knn_predict_4m(train: Dataset, query: WaferRecord, cfg: ModelConfig) -> float:
    """k-NN on standardized four-metric features."""
    if cfg.k > len(train):
        raise ValueError(f"k={cfg.k} exceeds training-set size {len(train)}")
    channels = cfg.resolve_channels(train)
    X = feature_matrix(train, channels, cfg.split_policy)
    means, stds = standardization(X)
    Z = (X - means) / stds
    q = np.asarray(featurize_wafer(query, channels, cfg.split_policy), dtype=float)
    qz = (q - means) / stds
    dists = feature_distances(Z, qz)
    return knn_regress(dists, train.etch_rates, train.wafer_ids, cfg.k, cfg.weighting)


def knn_predict_dtw(train: Dataset, query: WaferRecord, cfg: ModelConfig) -> float:
    """k-NN with the summed per-channel banded DTW distance."""
    if cfg.k > len(train):
        raise ValueError(f"k={cfg.k} exceeds training-set size {len(train)}")
    channels = cfg.resolve_channels(train)
    params = DtwParams(cfg.window)
    dists = [multichannel_distance(query, w, channels, params) for w in train.wafers]
    return knn_regress(dists, train.etch_rates, train.wafer_ids, cfg.k, cfg.weighting)
