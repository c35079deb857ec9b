"""Greedy decision trees whose split candidates are maximally coarse
conforming partitions of each feature's active level set.

Candidate gains follow the second-order (gradient/hessian) scoring used
by modern boosting libraries; leaf weights are -G/(H+lambda). Candidate
evaluation is vectorized and reduced under a total order (gain, then
canonical candidate order, then feature declaration order), so results
do not depend on evaluation interleaving.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .enumeration import PartitionCache, maximally_coarse_partitions_explicit
from .errors import EmptyDataset, InvalidConfig, MisalignedTargets, UnknownLevelAtPredict
from .graph import LevelGraph, LevelSet, induced_subgraph
from .terrain import Terrain

NO_GAIN = float("-inf")


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 3
    min_samples_leaf: int = 1
    min_gain: float = 0.0
    max_splits_to_search: int | None = None
    reg_lambda: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.max_depth < 1:
            raise InvalidConfig(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_leaf < 1:
            raise InvalidConfig(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if self.min_gain < 0 or self.reg_lambda < 0:
            raise InvalidConfig("min_gain and lambda must be >= 0")
        if self.max_splits_to_search is not None and self.max_splits_to_search < 1:
            raise InvalidConfig("max_splits_to_search must be >= 1 or unlimited")


@dataclass(frozen=True)
class TreeFeature:
    """One modeling feature: an id column plus the terrain over its levels."""

    name: str
    column: np.ndarray  # int level ids, aligned with the training rows
    terrain: Terrain

    @property
    def n_levels(self) -> int:
        return self.terrain.n_levels


def split_gain(gl: float, hl: float, gr: float, hr: float, reg_lambda: float = 0.0) -> float:
    """Second-order gain of a binary split from side gradient/hessian sums."""
    return 0.5 * (
        gl * gl / (hl + reg_lambda)
        + gr * gr / (hr + reg_lambda)
        - (gl + gr) ** 2 / (hl + hr + reg_lambda)
    )


def _partition_gain(g_parts, h_parts, g_tot, h_tot, reg_lambda: float) -> float:
    """Gain of a k-way split; reduces to split_gain for k = 2."""
    score = sum(g * g / (h + reg_lambda) for g, h in zip(g_parts, h_parts))
    return 0.5 * (score - g_tot * g_tot / (h_tot + reg_lambda))


@dataclass
class ScdtNode:
    node_id: int
    feature: str | None = None
    branches: list[tuple[LevelSet, int]] = field(default_factory=list)  # (level ids, child id)
    weight: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class ScdtTree:
    nodes: list[ScdtNode]

    def predict(self, columns: dict[str, np.ndarray], n_rows: int) -> np.ndarray:
        """Route rows by branch level-set membership; returns leaf weights."""
        out = np.empty(n_rows, dtype=np.float64)
        stack = [(0, np.arange(n_rows))]
        while stack:
            nid, rows = stack.pop()
            node = self.nodes[nid]
            if node.is_leaf:
                out[rows] = node.weight
                continue
            col = columns[node.feature][rows]
            lut = np.full(int(col.max(initial=-1)) + 2, -1, dtype=np.int64)
            for q, (level_ids, _child) in enumerate(node.branches):
                inside = [i for i in level_ids if i < len(lut)]
                lut[inside] = q
            route = lut[col]
            if (route < 0).any():
                bad = int(col[route < 0][0])
                raise UnknownLevelAtPredict(
                    f"level id {bad} of feature {node.feature!r} reached node {nid} "
                    f"outside all branches"
                )
            for q, (_levels, child) in enumerate(node.branches):
                sub = rows[route == q]
                if len(sub):
                    stack.append((child, sub))
        return out

    def n_leaves(self) -> int:
        return sum(1 for n in self.nodes if n.is_leaf)

    def to_dict(self, level_names: dict[str, tuple[str, ...]]) -> dict:
        nodes = []
        for n in self.nodes:
            if n.is_leaf:
                nodes.append({"id": n.node_id, "weight": n.weight})
            else:
                names = level_names[n.feature]
                nodes.append(
                    {
                        "id": n.node_id,
                        "feature": n.feature,
                        "branches": [
                            {"levels": [names[i] for i in ids], "child": child}
                            for ids, child in n.branches
                        ],
                    }
                )
        return {"nodes": nodes}

    @classmethod
    def from_dict(cls, doc: dict, level_ids: dict[str, dict[str, int]]) -> "ScdtTree":
        nodes = []
        for nd in sorted(doc["nodes"], key=lambda x: x["id"]):
            if "feature" in nd:
                ids = level_ids[nd["feature"]]
                branches = [
                    (tuple(sorted(ids[name] for name in br["levels"])), br["child"])
                    for br in nd["branches"]
                ]
                nodes.append(ScdtNode(node_id=nd["id"], feature=nd["feature"], branches=branches))
            else:
                nodes.append(ScdtNode(node_id=nd["id"], weight=float(nd["weight"])))
        return cls(nodes=nodes)


def _leaf_weight(g_sum: float, h_sum: float, reg_lambda: float) -> float:
    denom = h_sum + reg_lambda
    return -g_sum / denom if denom > 0 else 0.0


class _NodeSplit:
    __slots__ = ("gain", "feature_idx", "parts_local")

    def __init__(self, gain, feature_idx, parts_local):
        self.gain = gain
        self.feature_idx = feature_idx
        self.parts_local = parts_local  # partition in local (active-set positional) ids


def _subsample_indices(n: int, cap: int | None, params: TreeParams, salt: str, node_id: int, fi: int):
    if cap is None or n <= cap:
        return None
    rng = random.Random(f"{params.seed}:{salt}:{node_id}:{fi}")
    return sorted(rng.sample(range(n), cap))


def _best_graph_split(
    g_lv, h_lv, c_lv, sub_graph: LevelGraph, cache, params, salt, node_id, fi
) -> tuple[float, int, list] | None:
    candidates = cache.lookup_or_enumerate(sub_graph)
    if not candidates:
        return None
    mat = cache.side_a_matrix(sub_graph)
    pick = _subsample_indices(len(candidates), params.max_splits_to_search, params, salt, node_id, fi)
    if pick is not None:
        mat = mat[pick]
    m = mat.astype(np.float64)
    gl = m @ g_lv
    hl = m @ h_lv
    cl = m @ c_lv
    g_tot, h_tot, c_tot = g_lv.sum(), h_lv.sum(), c_lv.sum()
    gr, hr, cr = g_tot - gl, h_tot - hl, c_tot - cl
    lam = params.reg_lambda
    msl = params.min_samples_leaf
    valid = (hl + lam > 0) & (hr + lam > 0) & (cl >= msl) & (cr >= msl)
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        gains = 0.5 * (
            gl * gl / (hl + lam) + gr * gr / (hr + lam) - (g_tot * g_tot) / (h_tot + lam)
        )
    gains = np.where(valid, gains, NO_GAIN)
    best = int(np.argmax(gains))  # first max = smallest canonical candidate
    cand_idx = best if pick is None else pick[best]
    cand = candidates[cand_idx]
    return float(gains[best]), cand_idx, [cand.side_a, cand.side_b]


def _best_explicit_split(
    g_lv, h_lv, c_lv, terrain: Terrain, params, salt, node_id, fi
) -> tuple[float, int, list] | None:
    partitions = maximally_coarse_partitions_explicit(terrain)
    if not partitions:
        return None
    pick = _subsample_indices(len(partitions), params.max_splits_to_search, params, salt, node_id, fi)
    indices = range(len(partitions)) if pick is None else pick
    lam = params.reg_lambda
    msl = params.min_samples_leaf
    g_tot, h_tot = g_lv.sum(), h_lv.sum()
    best = None
    for idx in indices:
        parts = partitions[idx]
        gs = [sum(g_lv[i] for i in p) for p in parts]
        hs = [sum(h_lv[i] for i in p) for p in parts]
        cs = [sum(c_lv[i] for i in p) for p in parts]
        if any(h + lam <= 0 for h in hs) or any(c < msl for c in cs):
            continue
        gain = _partition_gain(gs, hs, g_tot, h_tot, lam)
        if best is None or gain > best[0]:
            best = (gain, idx, [tuple(p) for p in parts])
    return best


def fit_tree(
    features: list[TreeFeature],
    grad: np.ndarray,
    hess: np.ndarray,
    params: TreeParams,
    cache: PartitionCache | None = None,
    seed_salt: str = "",
) -> ScdtTree:
    """Grow one tree greedily against gradient/hessian targets.

    At each node, every feature contributes the maximally coarse
    partitions of its active level set (restricted terrain); when a
    feature offers more candidates than max_splits_to_search, a seeded
    uniform subset is evaluated instead. Growth stops on depth, leaf
    size, gain threshold, or when no feature has a splittable level set.
    """
    grad = np.asarray(grad, dtype=np.float64)
    hess = np.asarray(hess, dtype=np.float64)
    n = len(grad)
    if n == 0:
        raise EmptyDataset("cannot fit a tree on zero rows")
    if len(hess) != n or any(len(f.column) != n for f in features):
        raise MisalignedTargets("gradient/hessian/column lengths differ")
    if cache is None:
        cache = PartitionCache()

    nodes: list[ScdtNode] = []

    def search(rows: np.ndarray, actives: list[LevelSet], node_id: int) -> _NodeSplit | None:
        best: _NodeSplit | None = None
        for fi, feat in enumerate(features):
            active = actives[fi]
            k = len(active)
            if k < 2:
                continue
            lut = np.full(feat.n_levels, -1, dtype=np.int64)
            lut[list(active)] = np.arange(k)
            loc = lut[feat.column[rows]]
            g_lv = np.bincount(loc, weights=grad[rows], minlength=k)
            h_lv = np.bincount(loc, weights=hess[rows], minlength=k)
            c_lv = np.bincount(loc, minlength=k).astype(np.float64)
            if feat.terrain.graph is not None:
                g = feat.terrain.graph
                sub = g if k == g.n_levels else induced_subgraph(g, active)
                found = _best_graph_split(
                    g_lv, h_lv, c_lv, sub, cache, params, seed_salt, node_id, fi
                )
            else:
                t = feat.terrain
                sub_t = t if k == t.n_levels else t.restrict(active)
                found = _best_explicit_split(
                    g_lv, h_lv, c_lv, sub_t, params, seed_salt, node_id, fi
                )
            if found is None:
                continue
            gain, _cand_idx, parts_local = found
            if best is None or gain > best.gain:
                best = _NodeSplit(gain, fi, parts_local)
        return best

    def grow(rows: np.ndarray, actives: list[LevelSet], depth: int) -> int:
        node_id = len(nodes)
        nodes.append(ScdtNode(node_id=node_id))
        g_sum = float(grad[rows].sum())
        h_sum = float(hess[rows].sum())
        best = None
        if depth < params.max_depth and len(rows) >= 2 * params.min_samples_leaf:
            best = search(rows, actives, node_id)
        if best is None or best.gain <= params.min_gain:
            nodes[node_id].weight = _leaf_weight(g_sum, h_sum, params.reg_lambda)
            return node_id
        fi = best.feature_idx
        feat = features[fi]
        active = actives[fi]
        parts = [tuple(active[i] for i in p) for p in best.parts_local]
        parts.sort(key=lambda p: p[0])
        lut = np.full(feat.n_levels, -1, dtype=np.int64)
        for q, p in enumerate(parts):
            lut[list(p)] = q
        route = lut[feat.column[rows]]
        branches = []
        for q, p in enumerate(parts):
            child_rows = rows[route == q]
            child_actives = list(actives)
            child_actives[fi] = p
            child_id = grow(child_rows, child_actives, depth + 1)
            branches.append((p, child_id))
        nodes[node_id].feature = feat.name
        nodes[node_id].branches = branches
        return node_id

    all_rows = np.arange(n)
    actives0 = [tuple(range(f.n_levels)) for f in features]
    grow(all_rows, actives0, 0)
    return ScdtTree(nodes=nodes)


def predict_tree(tree: ScdtTree, columns: dict[str, np.ndarray], n_rows: int | None = None) -> np.ndarray:
    if n_rows is None:
        n_rows = len(next(iter(columns.values())))
    return tree.predict(columns, n_rows)
