"""Benchmark harness: one-hot vs ordinal vs structured vs siloed on
synthetic rain data, with the exactly-optimal log-loss as reference."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .baselines import fit_siloed
from .boosting import BoostParams, evaluate_logloss, fit_ensemble
from .dataset import Dataset, FeatureSpec
from .enumeration import PartitionCache
from .errors import InvalidConfig
from .synth import SyntheticRainConfig, generate_synthetic
from .tree import TreeParams

TREE_METHODS = ("one_hot", "ordinal", "structured")
ALL_METHODS = TREE_METHODS + ("siloed",)


@dataclass(frozen=True)
class BenchConfig:
    county_graph: str = "builtin:grid:4x5"
    smoothness: int = 2
    amplitude: float = 1.0
    phase_spread: float = 1.5
    sizes: tuple[int, ...] = (100, 500, 2000, 10000)
    repeats: int = 3
    methods: tuple[str, ...] = ALL_METHODS
    depths: tuple[int, ...] = (2, 3)
    n_trees: int = 300
    learning_rate: float = 0.1
    eval_every: int = 20
    min_samples_leaf: int = 1
    min_gain: float = 0.0
    reg_lambda: float = 0.0
    max_splits_to_search: int | None = None
    test_rows: int = 20000
    seed: int = 0

    def __post_init__(self):
        unknown = [m for m in self.methods if m not in ALL_METHODS]
        if unknown:
            raise InvalidConfig(f"unknown benchmark methods {unknown}; pick from {ALL_METHODS}")
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise InvalidConfig("sizes must be positive")
        if list(self.sizes) != sorted(self.sizes):
            raise InvalidConfig("sizes must be ascending")
        if self.repeats < 1 or self.test_rows < 1:
            raise InvalidConfig("repeats and test_rows must be >= 1")
        if not self.depths or any(d < 1 for d in self.depths):
            raise InvalidConfig("depths must be >= 1")


@dataclass(frozen=True)
class BenchRow:
    method: str
    size: int
    repeat: int
    logloss: float
    best_iteration: int | None  # tree methods only
    max_depth: int | None  # tree methods only


def _variant_schema(d: Dataset, method: str):
    """Schema for a method variant; columns and levels stay as generated."""
    if method == "structured":
        return d.schema
    feats = []
    for f in d.schema.features:
        if method == "one_hot":
            feats.append(replace(f, kind="one_hot"))
        elif method == "ordinal":
            # month keeps its declared (calendar) order; county ranks by training mean
            kind = "ordinal_declared" if f.name == "month" else "ordinal_target"
            feats.append(replace(f, kind=kind))
        else:
            raise InvalidConfig(f"no schema variant for method {method!r}")
    return replace(d.schema, features=tuple(feats))


def _with_schema(d: Dataset, schema) -> Dataset:
    return Dataset(schema=schema, columns=d.columns, target=d.target, levels=d.levels, graphs=d.graphs)


def run_benchmark(cfg: BenchConfig) -> list[BenchRow]:
    """Run every requested (method, size, repeat[, depth]) cell.

    Per repeat r, one synthetic world is drawn with seed cfg.seed + r;
    the first test_rows rows are the test set and training subsets are
    nested prefixes of the remainder. Tree methods track test log-loss
    every eval_every rounds and report the best score achieved.
    """
    max_size = max(cfg.sizes)
    results: dict[tuple, BenchRow] = {}
    for r in range(1, cfg.repeats + 1):
        world_seed = cfg.seed + r
        synth = SyntheticRainConfig(
            county_graph=cfg.county_graph,
            smoothness=cfg.smoothness,
            amplitude=cfg.amplitude,
            phase_spread=cfg.phase_spread,
            seed=world_seed,
            n_rows=cfg.test_rows + max_size,
        )
        full, truth = generate_synthetic(synth)
        test = full.subset(np.arange(cfg.test_rows))
        pool = full.subset(np.arange(cfg.test_rows, full.n_rows))

        optimal_probs = truth[test.columns["county"], test.columns["month"]]
        optimal_loss = evaluate_logloss(optimal_probs, test.target)

        cache = PartitionCache()  # shared across sizes/methods of this world
        for size in cfg.sizes:
            train = pool.subset(np.arange(size))
            for method in cfg.methods:
                if method == "siloed":
                    table = fit_siloed(train, ["county", "month"])
                    loss = evaluate_logloss(table.predict(test), test.target)
                    results[(method, size, r, None)] = BenchRow(method, size, r, loss, None, None)
                    continue
                schema_v = _variant_schema(train, method)
                train_v = _with_schema(train, schema_v)
                test_v = _with_schema(test, schema_v)
                for depth in cfg.depths:
                    params = BoostParams(
                        n_trees=cfg.n_trees,
                        learning_rate=cfg.learning_rate,
                        eval_every=cfg.eval_every,
                        task="binary",
                        tree=TreeParams(
                            max_depth=depth,
                            min_samples_leaf=cfg.min_samples_leaf,
                            min_gain=cfg.min_gain,
                            max_splits_to_search=cfg.max_splits_to_search,
                            reg_lambda=cfg.reg_lambda,
                            seed=world_seed,
                        ),
                    )
                    model = fit_ensemble(train_v, test_v, params, cache=cache)
                    best_loss = min(loss for _t, loss in model.valid_history)
                    results[(method, size, r, depth)] = BenchRow(
                        method, size, r, best_loss, model.best_iteration, depth
                    )
            results[("optimal", size, r, None)] = BenchRow("optimal", size, r, optimal_loss, None, None)

    ordered: list[BenchRow] = []
    for method in tuple(cfg.methods) + ("optimal",):
        for size in cfg.sizes:
            for r in range(1, cfg.repeats + 1):
                depths = cfg.depths if method in TREE_METHODS else (None,)
                for depth in depths:
                    ordered.append(results[(method, size, r, depth)])
    return ordered


def write_results_csv(rows: list[BenchRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "size", "repeat", "logloss", "best_iteration", "max_depth"])
        for row in rows:
            w.writerow(
                [
                    row.method,
                    row.size,
                    row.repeat,
                    f"{row.logloss:.6f}",
                    "" if row.best_iteration is None else row.best_iteration,
                    "" if row.max_depth is None else row.max_depth,
                ]
            )


def summarize(rows: list[BenchRow]) -> dict[tuple[str, int], float]:
    """Mean over repeats of each repeat's best-over-depths log-loss, per (method, size)."""
    per_cell: dict[tuple[str, int, int], float] = {}
    for row in rows:
        key = (row.method, row.size, row.repeat)
        if key not in per_cell or row.logloss < per_cell[key]:
            per_cell[key] = row.logloss
    agg: dict[tuple[str, int], list[float]] = {}
    for (method, size, _r), loss in per_cell.items():
        agg.setdefault((method, size), []).append(loss)
    return {k: float(np.mean(v)) for k, v in agg.items()}
