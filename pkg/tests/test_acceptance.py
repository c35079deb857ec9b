"""Acceptance gate: every release criterion as one test with a printed verdict.

Run with `pytest tests/test_acceptance.py -v -s` to see one line per
criterion. The long-running grid check is opt-in: `pytest -m slow`.
"""

import random
import time

import numpy as np
import pytest

from terrainboost.baselines import fit_siloed
from terrainboost.bench import BenchConfig, run_benchmark, summarize
from terrainboost.boosting import (
    BoostParams,
    evaluate_logloss,
    fit_ensemble,
    load_model,
    logloss_grad_hess,
    save_model,
)
from terrainboost.enumeration import count_connected_sets, maximally_coarse_partitions
from terrainboost.graph import build_graph, builtin_graph
from terrainboost.synth import SyntheticRainConfig, generate_synthetic
from terrainboost.terrain import Terrain
from terrainboost.tree import TreeFeature, TreeParams, fit_tree

from oracles import (
    graph_terrain_member_check,
    maximally_coarse_bruteforce,
    normalize_partition,
    random_connected_graph,
)

GOLDEN_GRID_COUNTS = {
    # (m, n) -> (|MP|, |CS'|, |CS|)
    (3, 3): (53, 79, 218),
    (3, 4): (146, 425, 1126),
    (4, 4): (627, 3331, 11506),
    (4, 5): (2471, 25850, 116166),
    (5, 5): (16213, 285938, 2301877),
}


def test_golden_grid_counts():
    t0 = time.time()
    for (m, n), (mp_exp, csh_exp, cs_exp) in GOLDEN_GRID_COUNTS.items():
        g = builtin_graph("grid", m, n)
        mp = len(maximally_coarse_partitions(g))
        csh = count_connected_sets(g, g.n_levels // 2)
        cs = count_connected_sets(g)
        assert (mp, csh, cs) == (mp_exp, csh_exp, cs_exp), f"grid {m}x{n}"
    print(f"\n[PASS] golden grid counts: five grids exact (MP/CS'/CS) in {time.time()-t0:.1f}s")


@pytest.mark.slow
def test_grid_5x6_counts_slow():
    g = builtin_graph("grid", 5, 6)
    csh = count_connected_sets(g, 15)
    assert csh == 5_616_968
    cands = maximally_coarse_partitions(g)
    mp = len(cands)
    # Unordered bipartitions: 103196. A scan over CS' that keeps every
    # half/half split from both orientations counts those splits twice,
    # hence the alternative convention 103196 + 8171 = 111367.
    half_pairs = sum(1 for c in cands if len(c.side_a) == 15)
    assert mp == 103_196
    assert mp + half_pairs == 111_367
    print(f"\n[PASS] grid 5x6 slow counts: CS'={csh}, bipartitions={mp} (+{half_pairs} half-size dupes)")


def test_graph_maximal_partitions_are_binary():
    t0 = time.time()
    rng = random.Random(20260810)
    for trial in range(200):
        n, edges = random_connected_graph(rng, 2, 8)
        member = graph_terrain_member_check(n, edges)
        # literal sweep of the full partition lattice
        from oracles import all_partitions

        conforming = []
        memo = {}

        def check(part):
            if part not in memo:
                memo[part] = member(part)
            return memo[part]

        for p in all_partitions(list(range(n))):
            parts = [tuple(sorted(x)) for x in p]
            if all(check(part) for part in parts):
                conforming.append(parts)
        maximal = maximally_coarse_bruteforce(conforming)
        assert all(len(p) == 2 for p in maximal), f"trial {trial}: non-binary maximal partition"
        oracle_pairs = {normalize_partition(p) for p in maximal}
        g = build_graph([f"v{i}" for i in range(n)], [(f"v{a}", f"v{b}") for a, b in edges])
        enum_pairs = {
            normalize_partition([c.side_a, c.side_b]) for c in maximally_coarse_partitions(g)
        }
        assert oracle_pairs == enum_pairs, f"trial {trial}: pair sets differ"
    print(f"\n[PASS] binary maximality: 200 random graphs, all maximal partitions binary and matching ({time.time()-t0:.1f}s)")


def test_cart_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(31415)
    for trial in range(50):
        n = int(rng.integers(5, 201))
        if trial % 3 == 0:
            x = rng.integers(0, 10, n).astype(float)  # repeated values
        else:
            x = rng.random(n)
        if len(np.unique(x)) < 2:
            x[0] += 1.0
        y = rng.random(n)

        # oracle: scan all thresholds between consecutive distinct values
        distinct = np.unique(x)
        g_tot, h_tot = float(-y.sum()), float(n)
        best_gain, best_left = -np.inf, None
        for t in range(len(distinct) - 1):
            cut = (distinct[t] + distinct[t + 1]) / 2.0
            left = x <= cut
            gl, hl = float(-y[left].sum()), float(left.sum())
            gr, hr = g_tot - gl, h_tot - hl
            gain = 0.5 * (gl * gl / hl + gr * gr / hr - g_tot * g_tot / h_tot)
            if gain > best_gain:
                best_gain, best_left = gain, left

        ids = np.searchsorted(distinct, x)
        feat = TreeFeature("x", ids, Terrain.from_graph(builtin_graph("chain", len(distinct))))
        tree = fit_tree([feat], -y, np.ones(n), TreeParams(max_depth=1))
        root = tree.nodes[0]
        assert not root.is_leaf, f"trial {trial}: no split chosen"
        left = np.isin(ids, list(root.branches[0][0]))
        gl, hl = float(-y[left].sum()), float(left.sum())
        gr, hr = g_tot - gl, h_tot - hl
        got_gain = 0.5 * (gl * gl / hl + gr * gr / hr - g_tot * g_tot / h_tot)
        assert abs(got_gain - best_gain) <= 1e-10, f"trial {trial}: gain mismatch"
        assert np.array_equal(left, best_left) or np.array_equal(~left, best_left), (
            f"trial {trial}: row partition differs"
        )
    print(f"\n[PASS] CART equivalence: 50 datasets, gains within 1e-10, partitions identical ({time.time()-t0:.1f}s)")


def test_gradient_oracle():
    rng = np.random.default_rng(271828)

    def loss(margin, y):
        p = 1.0 / (1.0 + np.exp(-margin))
        return -(y * np.log(p) + (1 - y) * np.log(1 - p))

    eps = 1e-3  # balances truncation vs float cancellation in the 2nd difference
    worst_g, worst_h = 0.0, 0.0
    for _ in range(100):
        margin = float(rng.uniform(-6, 6))
        y = float(rng.integers(0, 2))
        g, h = logloss_grad_hess(margin, y)
        g_fd = (loss(margin + eps, y) - loss(margin - eps, y)) / (2 * eps)
        h_fd = (loss(margin + eps, y) - 2 * loss(margin, y) + loss(margin - eps, y)) / eps**2
        worst_g = max(worst_g, abs(g - g_fd))
        worst_h = max(worst_h, abs(h - h_fd))
        assert abs(g - g_fd) < 1e-6
        assert abs(h - h_fd) < 1e-6
    print(f"\n[PASS] gradient oracle: 100 points, max |grad err|={worst_g:.2e}, max |hess err|={worst_h:.2e}")


def test_determinism_and_round_trip(tmp_path):
    cfg = SyntheticRainConfig(seed=13, n_rows=2500)
    full, _ = generate_synthetic(cfg)
    train = full.subset(np.arange(500))
    valid = full.subset(np.arange(500, 2500))
    params = BoostParams(
        n_trees=40, learning_rate=0.2, eval_every=10,
        tree=TreeParams(max_depth=2, max_splits_to_search=5, seed=7),
    )
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        save_model(fit_ensemble(train, valid, params), p)
    assert paths[0].read_bytes() == paths[1].read_bytes()

    model = load_model(paths[0])
    refit = fit_ensemble(train, valid, params)
    assert np.array_equal(refit.predict_proba(valid), model.predict_proba(valid))
    print("\n[PASS] determinism & round trip: byte-identical models, bit-identical predictions")


def test_siloed_convergence():
    t0 = time.time()
    cfg = SyntheticRainConfig(seed=1, n_rows=120_000)
    full, truth = generate_synthetic(cfg)
    test = full.subset(np.arange(20_000))
    train = full.subset(np.arange(20_000, 120_000))
    table = fit_siloed(train, ["county", "month"])
    siloed_loss = evaluate_logloss(table.predict(test), test.target)
    optimal_loss = evaluate_logloss(
        truth[test.columns["county"], test.columns["month"]], test.target
    )
    gap = siloed_loss - optimal_loss
    assert gap < 0.01, f"siloed {siloed_loss:.5f} vs optimal {optimal_loss:.5f}"
    print(f"\n[PASS] siloed convergence: gap to optimal {gap:.5f} < 0.01 at n=100000 ({time.time()-t0:.1f}s)")


def test_subsampling_sanity():
    t0 = time.time()
    cfg = SyntheticRainConfig(seed=1, n_rows=22_000)
    full, _ = generate_synthetic(cfg)
    test = full.subset(np.arange(20_000))
    train = full.subset(np.arange(20_000, 22_000))
    best = {}
    for mss in (None, 5):
        losses = []
        for depth in (2, 3):
            params = BoostParams(
                n_trees=300, learning_rate=0.1, eval_every=20,
                tree=TreeParams(max_depth=depth, seed=1, max_splits_to_search=mss),
            )
            model = fit_ensemble(train, test, params)
            losses.append(min(l for _, l in model.valid_history))
        best[mss] = min(losses)
    diff = abs(best[5] - best[None])
    assert diff <= 0.02, f"capped {best[5]:.5f} vs unlimited {best[None]:.5f}"
    print(
        f"\n[PASS] subsampling sanity: |{best[5]:.5f} - {best[None]:.5f}| = {diff:.5f} <= 0.02 "
        f"({time.time()-t0:.1f}s)"
    )


def test_benchmark_ordering():
    t0 = time.time()
    cfg = BenchConfig(
        county_graph="builtin:grid:4x5",
        sizes=(500, 2000),
        repeats=3,  # worlds seeded 1, 2, 3
        methods=("one_hot", "ordinal", "structured"),
        depths=(2, 3),
        n_trees=300,
        test_rows=20_000,
        seed=0,
    )
    means = summarize(run_benchmark(cfg))
    lines = []
    for size in cfg.sizes:
        structured = means[("structured", size)]
        one_hot = means[("one_hot", size)]
        ordinal = means[("ordinal", size)]
        assert structured < min(one_hot, ordinal), (
            f"size {size}: structured {structured:.5f} not below "
            f"one_hot {one_hot:.5f} / ordinal {ordinal:.5f}"
        )
        lines.append(
            f"size {size}: structured {structured:.5f} < min(one_hot {one_hot:.5f}, "
            f"ordinal {ordinal:.5f})"
        )
    print(f"\n[PASS] benchmark ordering: {'; '.join(lines)} ({time.time()-t0:.0f}s)")
