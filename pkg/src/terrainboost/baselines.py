"""Comparison encodings and the per-combination siloed model."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import InvalidConfig


@dataclass(frozen=True)
class OneHotFeature:
    """Binary indicator for one level of a categorical feature."""

    name: str
    source: str
    level: str
    column: np.ndarray  # 0/1 ids, chain:2 semantics


def encode_one_hot(d: Dataset, feature: str) -> list[OneHotFeature]:
    """Replace a categorical feature by one indicator per level.

    A single-level feature yields a constant column and is dropped with
    a warning.
    """
    levels = d.levels[feature]
    if len(levels) < 2:
        warnings.warn(f"one-hot: feature {feature!r} has a single level; dropped")
        return []
    col = d.columns[feature]
    return [
        OneHotFeature(
            name=f"{feature}={level}",
            source=feature,
            level=level,
            column=(col == i).astype(np.int64),
        )
        for i, level in enumerate(levels)
    ]


@dataclass(frozen=True)
class OrdinalMap:
    """Level -> rank mapping fitted on training rows only.

    For target-mean order, ranks sort observed levels by ascending
    training target mean (ties broken by level id); levels unseen in
    training borrow the rank of the observed level whose mean is nearest
    the global mean. Declared order ranks levels by their position in
    the declared level list.
    """

    feature: str
    order: str  # "target_mean" | "declared"
    levels: tuple[str, ...]
    ranks: tuple[int, ...]  # per level id
    means: tuple[float, ...] | None  # per level id, training means (target_mean only)
    observed: tuple[bool, ...]
    fallback_rank: int

    def apply(self, ids: np.ndarray) -> np.ndarray:
        ids = np.asarray(ids)
        unseen = ~np.asarray(self.observed)[ids]
        if unseen.any():
            names = sorted({self.levels[i] for i in np.unique(ids[unseen])})
            warnings.warn(
                f"ordinal encoding of {self.feature!r}: levels {names} were absent "
                f"from training; using fallback rank {self.fallback_rank}"
            )
        return np.asarray(self.ranks, dtype=np.float64)[ids]

    def to_dict(self) -> dict:
        means = None
        if self.means is not None:
            # unobserved levels carry nan means; keep the JSON strict with null
            means = [m if math.isfinite(m) else None for m in self.means]
        return {
            "feature": self.feature,
            "order": self.order,
            "levels": list(self.levels),
            "ranks": list(self.ranks),
            "means": means,
            "observed": [bool(o) for o in self.observed],
            "fallback_rank": self.fallback_rank,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "OrdinalMap":
        means = doc.get("means")
        if means is not None:
            means = tuple(float("nan") if m is None else m for m in means)
        return cls(
            feature=doc["feature"],
            order=doc["order"],
            levels=tuple(doc["levels"]),
            ranks=tuple(doc["ranks"]),
            means=means,
            observed=tuple(bool(o) for o in doc["observed"]),
            fallback_rank=doc["fallback_rank"],
        )


def encode_ordinal(train: Dataset, feature: str, order: str = "target_mean") -> tuple[OrdinalMap, np.ndarray]:
    """Fit a rank encoding on training rows; returns the map and the rank column."""
    levels = train.levels[feature]
    m = len(levels)
    col = train.columns[feature]
    if order == "declared":
        omap = OrdinalMap(
            feature=feature,
            order=order,
            levels=levels,
            ranks=tuple(range(m)),
            means=None,
            observed=(True,) * m,
            fallback_rank=0,
        )
        return omap, omap.apply(col)
    if order != "target_mean":
        raise InvalidConfig(f"unknown ordinal order {order!r}")
    y = train.target
    counts = np.bincount(col, minlength=m).astype(np.float64)
    sums = np.bincount(col, weights=y, minlength=m)
    observed = counts > 0
    with np.errstate(invalid="ignore"):
        means = np.where(observed, sums / np.maximum(counts, 1.0), np.nan)
    obs_ids = np.flatnonzero(observed)
    # ascending mean, ties by level id
    order_ids = obs_ids[np.lexsort((obs_ids, means[obs_ids]))]
    ranks = np.zeros(m, dtype=np.int64)
    for r, i in enumerate(order_ids):
        ranks[i] = r
    global_mean = float(y.mean())
    nearest = order_ids[np.lexsort((order_ids, np.abs(means[order_ids] - global_mean)))][0]
    fallback = int(ranks[nearest])
    ranks[~observed] = fallback
    omap = OrdinalMap(
        feature=feature,
        order=order,
        levels=levels,
        ranks=tuple(int(r) for r in ranks),
        means=tuple(float(v) if observed[i] else float("nan") for i, v in enumerate(means)),
        observed=tuple(bool(o) for o in observed),
        fallback_rank=fallback,
    )
    return omap, omap.apply(col)


@dataclass(frozen=True)
class SiloedTable:
    """Raw per-combination training means with a global-mean fallback."""

    features: tuple[str, ...]
    table: dict[tuple[int, ...], tuple[int, float]]  # key -> (count, mean)
    global_mean: float

    def predict(self, d: Dataset) -> np.ndarray:
        cols = [np.asarray(d.columns[f]) for f in self.features]
        out = np.empty(len(cols[0]), dtype=np.float64)
        for r in range(len(out)):
            key = tuple(int(c[r]) for c in cols)
            hit = self.table.get(key)
            out[r] = self.global_mean if hit is None else hit[1]
        return out

    def to_dict(self) -> dict:
        return {
            "features": list(self.features),
            "global_mean": self.global_mean,
            "cells": [
                {"key": list(k), "count": c, "mean": mu}
                for k, (c, mu) in sorted(self.table.items())
            ],
        }


def fit_siloed(train: Dataset, features: list[str]) -> SiloedTable:
    """Tabulate the training target mean for every observed level combination."""
    if not features:
        raise InvalidConfig("siloed model needs at least one categorical feature")
    cols = [np.asarray(train.columns[f]) for f in features]
    y = train.target
    sums: dict[tuple[int, ...], float] = {}
    counts: dict[tuple[int, ...], int] = {}
    for r in range(len(y)):
        key = tuple(int(c[r]) for c in cols)
        sums[key] = sums.get(key, 0.0) + float(y[r])
        counts[key] = counts.get(key, 0) + 1
    table = {k: (counts[k], sums[k] / counts[k]) for k in sums}
    return SiloedTable(features=tuple(features), table=table, global_mean=float(y.mean()))
