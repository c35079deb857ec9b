"""Seeded synthetic rain-by-county-and-month data with known truth.

Each county gets a spatial log-odds field (iid noise smoothed over the
county graph); each month adds a sinusoidal effect on the 12-cycle whose
phase also drifts smoothly over the county graph, so neighboring
counties share both their base rate and their rainy season. The true
probability table is returned alongside the sampled rows, so benchmark
consumers can compute the exactly-optimal log-loss.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, FeatureSchema, FeatureSpec, dataset_from_arrays
from .errors import InvalidConfig
from .graph import parse_graph_spec

N_MONTHS = 12
MONTH_GRAPH_SPEC = f"builtin:cycle:{N_MONTHS}"


@dataclass(frozen=True)
class SyntheticRainConfig:
    county_graph: str = "builtin:grid:4x5"
    smoothness: int = 2  # Laplacian smoothing passes over the county graph
    amplitude: float = 1.0  # month effect size on the log-odds scale
    phase_spread: float = 1.5  # std (radians) of the per-county seasonal phase
    seed: int = 0
    n_rows: int = 10000

    def __post_init__(self):
        if self.smoothness < 0:
            raise InvalidConfig(f"smoothness must be >= 0, got {self.smoothness}")
        if self.amplitude < 0 or self.phase_spread < 0:
            raise InvalidConfig("amplitude and phase_spread must be >= 0")
        if self.n_rows < 1:
            raise InvalidConfig(f"n_rows must be >= 1, got {self.n_rows}")


def rain_schema(config: SyntheticRainConfig) -> FeatureSchema:
    return FeatureSchema(
        target="rain",
        task="binary",
        features=(
            FeatureSpec(name="county", kind="structured", graph=config.county_graph),
            FeatureSpec(name="month", kind="structured", graph=MONTH_GRAPH_SPEC),
        ),
    )


def _spatial_field(g, smoothness: int, rng) -> np.ndarray:
    x = rng.standard_normal(g.n_levels)
    if g.n_levels == 1:
        return np.zeros(1)
    adj = np.zeros((g.n_levels, g.n_levels))
    for a, b in g.edges:
        adj[a, b] = adj[b, a] = 1.0
    deg = adj.sum(axis=1)
    for _ in range(smoothness):
        x = 0.5 * x + 0.5 * (adj @ x) / np.maximum(deg, 1.0)
    std = x.std()
    if std > 0:
        x = (x - x.mean()) / std
    return x


def generate_synthetic(config: SyntheticRainConfig) -> tuple[Dataset, np.ndarray]:
    """Sample (county, month, rain) rows; returns the dataset and the truth table.

    The truth table has shape (n_counties, 12) and holds the exact
    rain probability used to draw each cell.
    """
    county_graph = parse_graph_spec(config.county_graph)
    month_graph = parse_graph_spec(MONTH_GRAPH_SPEC)
    rng = np.random.default_rng(config.seed)

    field = _spatial_field(county_graph, config.smoothness, rng)
    phase = rng.uniform(0.0, 2.0 * np.pi) + config.phase_spread * _spatial_field(
        county_graph, config.smoothness, rng
    )
    months = np.arange(N_MONTHS)
    angle = 2.0 * np.pi * months[None, :] / N_MONTHS + phase[:, None]
    logit = field[:, None] + config.amplitude * np.cos(angle)
    truth = 1.0 / (1.0 + np.exp(-logit))

    county = rng.integers(0, county_graph.n_levels, size=config.n_rows)
    month = rng.integers(0, N_MONTHS, size=config.n_rows)
    y = (rng.random(config.n_rows) < truth[county, month]).astype(np.float64)

    schema = rain_schema(config)
    d = dataset_from_arrays(
        schema,
        columns={"county": county.astype(np.int64), "month": month.astype(np.int64)},
        target=y,
        levels={"county": county_graph.levels, "month": month_graph.levels},
        graphs={"county": county_graph, "month": month_graph},
    )
    return d, truth


def write_synthetic_csv(d: Dataset, path) -> None:
    county_names = d.levels["county"]
    month_names = d.levels["month"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["county", "month", "rain"])
        county = d.columns["county"]
        month = d.columns["month"]
        for i in range(d.n_rows):
            w.writerow([county_names[county[i]], month_names[month[i]], int(d.target[i])])


def write_truth_csv(d: Dataset, truth: np.ndarray, path) -> None:
    county_names = d.levels["county"]
    month_names = d.levels["month"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["county", "month", "p_rain"])
        for c, cname in enumerate(county_names):
            for m, mname in enumerate(month_names):
                w.writerow([cname, mname, f"{truth[c, m]:.10f}"])
