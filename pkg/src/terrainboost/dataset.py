"""Schema-driven CSV ingestion, numeric binning and train/test splitting."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConstantColumn,
    EmptySplit,
    InvalidConfig,
    MissingColumn,
    MissingValue,
    NonBinaryTarget,
    UnknownLevel,
)
from .graph import LevelGraph, builtin_graph, parse_graph_spec

FEATURE_KINDS = ("structured", "one_hot", "ordinal_target", "ordinal_declared", "numeric")


@dataclass(frozen=True)
class FeatureSpec:
    """Declaration of one input column."""

    name: str
    kind: str
    graph: str | None = None  # structured: file path or builtin:... spec
    levels: tuple[str, ...] | None = None  # categorical kinds without a graph
    max_bins: int = 64

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise InvalidConfig(f"feature {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "structured" and not self.graph:
            raise InvalidConfig(f"structured feature {self.name!r} needs a graph spec")
        if self.kind == "numeric" and self.max_bins < 2:
            raise InvalidConfig(f"numeric feature {self.name!r} needs max_bins >= 2")


@dataclass(frozen=True)
class FeatureSchema:
    target: str
    task: str  # binary | regression
    features: tuple[FeatureSpec, ...]

    def __post_init__(self):
        if self.task not in ("binary", "regression"):
            raise InvalidConfig(f"unknown task {self.task!r}")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise InvalidConfig("feature names must be unique")
        if self.target in names:
            raise InvalidConfig(f"target {self.target!r} also declared as a feature")
        if not self.features:
            raise InvalidConfig("schema declares no features")

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureSchema":
        feats = []
        for f in doc["features"]:
            feats.append(
                FeatureSpec(
                    name=f["name"],
                    kind=f["kind"],
                    graph=f.get("graph"),
                    levels=tuple(f["levels"]) if f.get("levels") else None,
                    max_bins=int(f.get("max_bins", 64)),
                )
            )
        return cls(target=doc["target"], task=doc.get("task", "binary"), features=tuple(feats))

    @classmethod
    def from_file(cls, path) -> "FeatureSchema":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        feats = []
        for f in self.features:
            entry: dict = {"name": f.name, "kind": f.kind}
            if f.graph is not None:
                entry["graph"] = f.graph
            if f.levels is not None:
                entry["levels"] = list(f.levels)
            if f.kind == "numeric":
                entry["max_bins"] = f.max_bins
            feats.append(entry)
        return {"target": self.target, "task": self.task, "features": feats}

    def feature(self, name: str) -> FeatureSpec:
        for f in self.features:
            if f.name == name:
                return f
        raise MissingColumn(f"schema has no feature {name!r}")


@dataclass
class Dataset:
    """Columnar training data: id columns for categoricals, floats for numerics."""

    schema: FeatureSchema
    columns: dict[str, np.ndarray]
    target: np.ndarray | None
    levels: dict[str, tuple[str, ...]]  # per categorical feature
    graphs: dict[str, LevelGraph]  # per structured feature

    @property
    def n_rows(self) -> int:
        first = next(iter(self.columns.values()))
        return len(first)

    def subset(self, rows: np.ndarray) -> "Dataset":
        return Dataset(
            schema=self.schema,
            columns={k: v[rows] for k, v in self.columns.items()},
            target=None if self.target is None else self.target[rows],
            levels=self.levels,
            graphs=self.graphs,
        )

    def level_names(self, feature: str, ids: np.ndarray) -> list[str]:
        names = self.levels[feature]
        return [names[i] for i in ids]


def _resolve_levels(spec: FeatureSpec, graphs: dict[str, LevelGraph]) -> tuple[str, ...] | None:
    if spec.kind == "numeric":
        return None
    if spec.graph:
        if spec.name not in graphs:
            graphs[spec.name] = parse_graph_spec(spec.graph)
        return graphs[spec.name].levels
    return spec.levels  # may be None: inferred from the data at load


def load_dataset(csv_path, schema: FeatureSchema, require_target: bool = True) -> Dataset:
    """Read a CSV under a schema, mapping level names to ids and validating values.

    Missing cells, unknown levels and non-binary targets are rejected
    with the offending row number in the message.
    """
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn(f"{csv_path}: empty file") from None
        rows = list(reader)

    col_idx = {name: i for i, name in enumerate(header)}
    needed = [f.name for f in schema.features]
    if require_target:
        needed.append(schema.target)
    for name in needed:
        if name not in col_idx:
            raise MissingColumn(f"{csv_path}: missing column {name!r}")

    graphs: dict[str, LevelGraph] = {}
    levels: dict[str, tuple[str, ...]] = {}
    raw: dict[str, list[str]] = {}
    for spec in schema.features:
        idx = col_idx[spec.name]
        cells = []
        for r, row in enumerate(rows):
            v = row[idx] if idx < len(row) else ""
            if v == "":
                raise MissingValue(f"{csv_path}: empty {spec.name!r} cell at data row {r + 1}")
            cells.append(v)
        raw[spec.name] = cells
        lv = _resolve_levels(spec, graphs)
        if spec.kind != "numeric":
            levels[spec.name] = lv if lv is not None else tuple(sorted(set(cells)))

    columns: dict[str, np.ndarray] = {}
    for spec in schema.features:
        cells = raw[spec.name]
        if spec.kind == "numeric":
            try:
                columns[spec.name] = np.array([float(v) for v in cells], dtype=np.float64)
            except ValueError as e:
                raise MissingValue(f"{csv_path}: non-numeric {spec.name!r} value ({e})") from None
        else:
            idx_of = {name: i for i, name in enumerate(levels[spec.name])}
            ids = np.empty(len(cells), dtype=np.int64)
            for r, v in enumerate(cells):
                try:
                    ids[r] = idx_of[v]
                except KeyError:
                    raise UnknownLevel(
                        f"{csv_path}: {spec.name!r} value {v!r} at data row {r + 1} "
                        f"is not a declared level"
                    ) from None
            columns[spec.name] = ids

    target = None
    if require_target:
        idx = col_idx[schema.target]
        vals = []
        for r, row in enumerate(rows):
            v = row[idx] if idx < len(row) else ""
            if v == "":
                raise MissingValue(f"{csv_path}: empty target cell at data row {r + 1}")
            vals.append(v)
        try:
            target = np.array([float(v) for v in vals], dtype=np.float64)
        except ValueError:
            raise NonBinaryTarget(f"{csv_path}: target column is not numeric") from None
        if schema.task == "binary" and not np.isin(target, (0.0, 1.0)).all():
            bad = int(np.flatnonzero(~np.isin(target, (0.0, 1.0)))[0])
            raise NonBinaryTarget(
                f"{csv_path}: binary target must be 0/1, got {vals[bad]!r} at data row {bad + 1}"
            )

    return Dataset(schema=schema, columns=columns, target=target, levels=levels, graphs=graphs)


def dataset_from_arrays(schema: FeatureSchema, columns, target, levels, graphs) -> Dataset:
    """Assemble an in-memory dataset from already-encoded columns."""
    n = {len(v) for v in columns.values()}
    if target is not None:
        n.add(len(target))
    if len(n) != 1:
        raise InvalidConfig(f"column lengths differ: {sorted(n)}")
    return Dataset(
        schema=schema,
        columns={k: np.asarray(v) for k, v in columns.items()},
        target=None if target is None else np.asarray(target, dtype=np.float64),
        levels=dict(levels),
        graphs=dict(graphs),
    )


@dataclass(frozen=True)
class NumericBinning:
    """Mapping from raw numeric values to chain-ordered bin ids.

    `cuts` are interior cut points: bin(v) = count of cuts <= v, which
    clamps out-of-range values to the extreme bins.
    """

    cuts: tuple[float, ...]

    @property
    def n_bins(self) -> int:
        return len(self.cuts) + 1

    def apply(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=np.float64)
        return np.searchsorted(np.asarray(self.cuts), v, side="right").astype(np.int64)

    def chain(self) -> LevelGraph:
        return builtin_graph("chain", self.n_bins)


def bin_numeric(values, max_bins: int) -> tuple[np.ndarray, NumericBinning]:
    """Bin a numeric column into at most max_bins ordered bins.

    One bin per distinct value when there are few enough; quantile bins
    otherwise. A constant column cannot be binned into a chain of >= 2.
    """
    if max_bins < 2:
        raise InvalidConfig(f"max_bins must be >= 2, got {max_bins}")
    v = np.asarray(values, dtype=np.float64)
    distinct = np.unique(v)
    if len(distinct) < 2:
        raise ConstantColumn(f"column has a single distinct value {distinct[0]!r}")
    if len(distinct) <= max_bins:
        cuts = (distinct[:-1] + distinct[1:]) / 2.0
    else:
        qs = np.quantile(v, np.linspace(0.0, 1.0, max_bins + 1)[1:-1])
        cuts = np.unique(qs)
        # quantile ties can collapse everything onto one cut value equal to the max
        cuts = cuts[cuts < distinct[-1]]
        if len(cuts) == 0:
            cuts = (distinct[:1] + distinct[1:2]) / 2.0
    binning = NumericBinning(cuts=tuple(float(c) for c in cuts))
    return binning.apply(v), binning


def split_train_test(d: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Disjoint, exhaustive, seed-reproducible row split into (train, test)."""
    n = d.n_rows
    n_test = int(round(n * test_fraction))
    if not (0 < test_fraction < 1) or n_test < 1 or n_test >= n:
        raise EmptySplit(f"test_fraction {test_fraction} leaves an empty side for n={n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    return d.subset(np.sort(perm[n_test:])), d.subset(np.sort(perm[:n_test]))
