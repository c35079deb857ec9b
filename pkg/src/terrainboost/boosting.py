"""Gradient boosting over structured categorical decision trees.

Binary classification uses log-loss (gradient = p - y, hessian = p(1-p)
at the current margin); regression uses squared error. The additive
model is margin = base_score + learning_rate * sum(tree outputs), and
binary probabilities are the logistic of the margin.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .baselines import OrdinalMap, encode_one_hot, encode_ordinal
from .dataset import Dataset, FeatureSchema, bin_numeric
from .enumeration import PartitionCache
from .errors import (
    ConstantColumn,
    EmptyDataset,
    InvalidConfig,
    LengthMismatch,
    UnknownLevelAtPredict,
)
from .graph import LevelGraph, build_graph, builtin_graph
from .terrain import Terrain
from .tree import ScdtTree, TreeFeature, TreeParams, fit_tree


@dataclass(frozen=True)
class BoostParams:
    n_trees: int = 300
    learning_rate: float = 0.1
    eval_every: int = 20
    task: str = "binary"
    tree: TreeParams = field(default_factory=TreeParams)

    def __post_init__(self):
        if self.n_trees < 1:
            raise InvalidConfig(f"n_trees must be >= 1, got {self.n_trees}")
        if not (0 < self.learning_rate <= 1):
            raise InvalidConfig(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if self.eval_every < 1:
            raise InvalidConfig(f"eval_every must be >= 1, got {self.eval_every}")
        if self.task not in ("binary", "regression"):
            raise InvalidConfig(f"unknown task {self.task!r}")


def logloss_grad_hess(margin, y):
    """Gradient and hessian of the log-loss at a raw margin."""
    p = 1.0 / (1.0 + np.exp(-np.asarray(margin, dtype=np.float64)))
    return p - y, p * (1.0 - p)


def squared_grad_hess(margin, y):
    m = np.asarray(margin, dtype=np.float64)
    return m - y, np.ones_like(m)


def evaluate_logloss(probs, targets) -> float:
    """Negative average log-likelihood, with probabilities clipped away from 0 and 1."""
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if len(p) != len(y):
        raise LengthMismatch(f"{len(p)} probabilities vs {len(y)} targets")
    p = np.clip(p, 1e-15, 1.0 - 1e-15)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def evaluate_mse(preds, targets) -> float:
    p = np.asarray(preds, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if len(p) != len(y):
        raise LengthMismatch(f"{len(p)} predictions vs {len(y)} targets")
    return float(np.mean((p - y) ** 2))


@dataclass(frozen=True)
class ModelFeature:
    """A modeling feature plus the recipe mapping raw source values onto its ids."""

    name: str
    source: str
    kind: str  # structured | numeric | indicator | ordinal
    graph: LevelGraph
    source_levels: tuple[str, ...] | None = None
    cuts: tuple[float, ...] | None = None
    indicator_level: str | None = None
    ordinal: OrdinalMap | None = None

    def ids_from(self, d: Dataset) -> np.ndarray:
        if self.kind == "numeric":
            return np.searchsorted(np.asarray(self.cuts), d.columns[self.source], side="right")
        have = d.levels.get(self.source)
        if have != self.source_levels:
            raise UnknownLevelAtPredict(
                f"feature {self.source!r}: data levels do not match the model "
                f"(got {have}, expected {self.source_levels})"
            )
        col = d.columns[self.source]
        if self.kind == "structured":
            return col
        if self.kind == "indicator":
            return (col == self.source_levels.index(self.indicator_level)).astype(np.int64)
        if self.kind == "ordinal":
            ranks = self.ordinal.apply(col)
            return np.searchsorted(np.asarray(self.cuts), ranks, side="right")
        raise InvalidConfig(f"unknown model feature kind {self.kind!r}")

    def to_dict(self) -> dict:
        doc: dict = {
            "name": self.name,
            "source": self.source,
            "kind": self.kind,
            "graph": self.graph.to_dict(),
        }
        if self.source_levels is not None:
            doc["source_levels"] = list(self.source_levels)
        if self.cuts is not None:
            doc["cuts"] = list(self.cuts)
        if self.indicator_level is not None:
            doc["indicator_level"] = self.indicator_level
        if self.ordinal is not None:
            doc["ordinal"] = self.ordinal.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelFeature":
        gd = doc["graph"]
        graph = build_graph(gd["levels"], [tuple(e) for e in gd["edges"]], name=gd["name"])
        return cls(
            name=doc["name"],
            source=doc["source"],
            kind=doc["kind"],
            graph=graph,
            source_levels=tuple(doc["source_levels"]) if "source_levels" in doc else None,
            cuts=tuple(doc["cuts"]) if "cuts" in doc else None,
            indicator_level=doc.get("indicator_level"),
            ordinal=OrdinalMap.from_dict(doc["ordinal"]) if "ordinal" in doc else None,
        )


def _build_model_features(train: Dataset) -> tuple[list[ModelFeature], list[np.ndarray]]:
    model_features: list[ModelFeature] = []
    columns: list[np.ndarray] = []

    def add(mf: ModelFeature, col: np.ndarray) -> None:
        model_features.append(mf)
        columns.append(np.asarray(col, dtype=np.int64))

    for spec in train.schema.features:
        name = spec.name
        if spec.kind == "structured":
            g = train.graphs[name]
            add(
                ModelFeature(name=name, source=name, kind="structured", graph=g,
                             source_levels=train.levels[name]),
                train.columns[name],
            )
        elif spec.kind == "numeric":
            try:
                ids, binning = bin_numeric(train.columns[name], spec.max_bins)
            except ConstantColumn:
                warnings.warn(f"numeric feature {name!r} is constant; dropped")
                continue
            add(
                ModelFeature(name=name, source=name, kind="numeric",
                             graph=binning.chain(), cuts=binning.cuts),
                ids,
            )
        elif spec.kind == "one_hot":
            parts = encode_one_hot(train, name)
            for part in parts:
                add(
                    ModelFeature(name=part.name, source=name, kind="indicator",
                                 graph=builtin_graph("chain", 2),
                                 source_levels=train.levels[name],
                                 indicator_level=part.level),
                    part.column,
                )
        elif spec.kind in ("ordinal_target", "ordinal_declared"):
            order = "target_mean" if spec.kind == "ordinal_target" else "declared"
            omap, rank_col = encode_ordinal(train, name, order=order)
            try:
                ids, binning = bin_numeric(rank_col, max(spec.max_bins, 2))
            except ConstantColumn:
                warnings.warn(f"ordinal feature {name!r} has a single observed rank; dropped")
                continue
            add(
                ModelFeature(name=name, source=name, kind="ordinal",
                             graph=binning.chain(), cuts=binning.cuts,
                             source_levels=train.levels[name], ordinal=omap),
                ids,
            )
        else:  # unreachable: FeatureSpec validates kinds
            raise InvalidConfig(f"unknown feature kind {spec.kind!r}")
    if not model_features:
        raise InvalidConfig("no usable features after encoding")
    return model_features, columns


@dataclass
class BoostedEnsemble:
    task: str
    base_score: float
    learning_rate: float
    schema: FeatureSchema
    model_features: list[ModelFeature]
    trees: list[ScdtTree]
    best_iteration: int
    valid_history: list[tuple[int, float]] = field(default_factory=list)

    def _margins(self, d: Dataset) -> np.ndarray:
        columns = {mf.name: mf.ids_from(d) for mf in self.model_features}
        n = d.n_rows
        margin = np.full(n, self.base_score, dtype=np.float64)
        for tree in self.trees:
            margin += self.learning_rate * tree.predict(columns, n)
        return margin

    def predict_margin(self, d: Dataset) -> np.ndarray:
        return self._margins(d)

    def predict_proba(self, d: Dataset) -> np.ndarray:
        if self.task != "binary":
            raise InvalidConfig("predict_proba requires a binary-task model")
        return 1.0 / (1.0 + np.exp(-self._margins(d)))

    def predict_value(self, d: Dataset) -> np.ndarray:
        return self._margins(d)

    def to_dict(self) -> dict:
        level_names = {mf.name: mf.graph.levels for mf in self.model_features}
        return {
            "task": self.task,
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "best_iteration": self.best_iteration,
            "schema": self.schema.to_dict(),
            "preprocessing": [mf.to_dict() for mf in self.model_features],
            "trees": [t.to_dict(level_names) for t in self.trees],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "BoostedEnsemble":
        model_features = [ModelFeature.from_dict(d) for d in doc["preprocessing"]]
        level_ids = {mf.name: mf.graph.level_ids for mf in model_features}
        return cls(
            task=doc["task"],
            base_score=float(doc["base_score"]),
            learning_rate=float(doc["learning_rate"]),
            schema=FeatureSchema.from_dict(doc["schema"]),
            model_features=model_features,
            trees=[ScdtTree.from_dict(t, level_ids) for t in doc["trees"]],
            best_iteration=int(doc["best_iteration"]),
        )


def save_model(model: BoostedEnsemble, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path) -> BoostedEnsemble:
    with open(path, "r", encoding="utf-8") as fh:
        return BoostedEnsemble.from_dict(json.load(fh))


def _base_score(y: np.ndarray, task: str) -> float:
    if task == "regression":
        return float(y.mean())
    mean = float(y.mean())
    n = len(y)
    if mean <= 0.0 or mean >= 1.0:
        clamped = min(max(mean, 0.5 / n), 1.0 - 0.5 / n)
        warnings.warn(
            f"degenerate target (training mean {mean}); base score clamped to "
            f"log-odds of {clamped}"
        )
        mean = clamped
    return float(np.log(mean / (1.0 - mean)))


def fit_ensemble(
    train: Dataset,
    valid: Dataset | None,
    params: BoostParams,
    cache: PartitionCache | None = None,
) -> BoostedEnsemble:
    """Boost trees against the running gradients; track the best validated round.

    With a validation set, the loss is recorded every eval_every trees
    (and at the last tree) and the returned model is truncated at the
    best recorded iteration.
    """
    if train.n_rows == 0:
        raise EmptyDataset("training data has no rows")
    if train.target is None:
        raise EmptyDataset("training data has no target column")
    y = train.target
    grad_hess = logloss_grad_hess if params.task == "binary" else squared_grad_hess
    if cache is None:
        cache = PartitionCache()

    model_features, columns = _build_model_features(train)
    tree_features = [
        TreeFeature(name=mf.name, column=col, terrain=Terrain.from_graph(mf.graph))
        for mf, col in zip(model_features, columns)
    ]

    base = _base_score(y, params.task)
    margin = np.full(train.n_rows, base, dtype=np.float64)

    model = BoostedEnsemble(
        task=params.task,
        base_score=base,
        learning_rate=params.learning_rate,
        schema=train.schema,
        model_features=model_features,
        trees=[],
        best_iteration=0,
    )

    valid_columns = None
    valid_margin = None
    if valid is not None:
        valid_columns = {mf.name: mf.ids_from(valid) for mf in model_features}
        valid_margin = np.full(valid.n_rows, base, dtype=np.float64)

    def valid_loss() -> float:
        if params.task == "binary":
            return evaluate_logloss(1.0 / (1.0 + np.exp(-valid_margin)), valid.target)
        return evaluate_mse(valid_margin, valid.target)

    history: list[tuple[int, float]] = []
    best_loss = float("inf")
    best_t = 0
    train_cols = {mf.name: col for mf, col in zip(model_features, columns)}

    for t in range(1, params.n_trees + 1):
        grad, hess = grad_hess(margin, y)
        tree = fit_tree(tree_features, grad, hess, params.tree, cache, seed_salt=str(t))
        model.trees.append(tree)
        margin += params.learning_rate * tree.predict(train_cols, train.n_rows)
        if valid is not None:
            valid_margin += params.learning_rate * tree.predict(valid_columns, valid.n_rows)
            if t % params.eval_every == 0 or t == params.n_trees:
                loss = valid_loss()
                history.append((t, loss))
                if loss < best_loss:
                    best_loss = loss
                    best_t = t

    if valid is not None:
        model.trees = model.trees[:best_t]
        model.best_iteration = best_t
        model.valid_history = history
    else:
        model.best_iteration = params.n_trees
    return model


def predict_proba(model: BoostedEnsemble, d: Dataset) -> np.ndarray:
    return model.predict_proba(d)
