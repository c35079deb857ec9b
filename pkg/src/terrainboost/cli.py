"""Command-line interface: enumerate, train, predict, bench, synth."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .bench import ALL_METHODS, BenchConfig, run_benchmark, write_results_csv
from .boosting import (
    BoostParams,
    evaluate_logloss,
    evaluate_mse,
    fit_ensemble,
    load_model,
    save_model,
)
from .dataset import FeatureSchema, load_dataset
from .enumeration import (
    PartitionCache,
    connected_sets,
    count_connected_sets,
    maximally_coarse_partitions,
)
from .errors import TerrainBoostError, UnknownLevel, UnknownLevelAtPredict
from .graph import parse_graph_spec
from .synth import SyntheticRainConfig, generate_synthetic, rain_schema, write_synthetic_csv, write_truth_csv
from .tree import TreeParams


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x)


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def cmd_enumerate(args) -> int:
    g = parse_graph_spec(args.graph)
    half = g.n_levels // 2
    if args.list:
        if not args.mode:
            raise TerrainBoostError("--list needs --mode (mp, cs or cs_half)")
        if args.mode == "mp":
            for cand in maximally_coarse_partitions(g):
                a = ",".join(g.levels[i] for i in cand.side_a)
                b = ",".join(g.levels[i] for i in cand.side_b)
                print(f"{a} | {b}")
        else:
            max_size = half if args.mode == "cs_half" else None
            for s in connected_sets(g, max_size):
                print(",".join(g.levels[i] for i in s))
        return 0
    if args.count and args.mode:
        if args.mode == "mp":
            print(len(maximally_coarse_partitions(g)))
        elif args.mode == "cs_half":
            print(count_connected_sets(g, half))
        else:
            print(count_connected_sets(g))
        return 0
    # full summary row, matching the columns of the counts table
    mp = len(maximally_coarse_partitions(g))
    csh = count_connected_sets(g, half)
    cs = count_connected_sets(g)
    print("name,n_levels,n_edges,mp,cs_half,cs")
    print(f"{g.name},{g.n_levels},{len(g.edges)},{mp},{csh},{cs}")
    return 0


def _tree_params(args) -> TreeParams:
    return TreeParams(
        max_depth=args.max_depth,
        min_samples_leaf=args.min_samples_leaf,
        min_gain=args.min_gain,
        max_splits_to_search=args.max_splits_to_search,
        reg_lambda=args.reg_lambda,
        seed=args.seed,
    )


def cmd_train(args) -> int:
    schema = FeatureSchema.from_file(args.schema)
    train = load_dataset(args.data, schema)
    valid = load_dataset(args.valid, schema) if args.valid else None
    params = BoostParams(
        n_trees=args.n_trees,
        learning_rate=args.learning_rate,
        eval_every=args.eval_every,
        task=schema.task,
        tree=_tree_params(args),
    )
    cache = None
    if args.cache_file:
        cache = (
            PartitionCache.load(args.cache_file)
            if Path(args.cache_file).exists()
            else PartitionCache()
        )
    model = fit_ensemble(train, valid, params, cache=cache)
    save_model(model, args.out)
    if args.cache_file:
        cache.save(args.cache_file)

    if schema.task == "binary":
        train_loss = evaluate_logloss(model.predict_proba(train), train.target)
        line = f"train_logloss={train_loss:.6f}"
        if valid is not None:
            line += f" valid_logloss={evaluate_logloss(model.predict_proba(valid), valid.target):.6f}"
    else:
        train_loss = evaluate_mse(model.predict_value(train), train.target)
        line = f"train_mse={train_loss:.6f}"
        if valid is not None:
            line += f" valid_mse={evaluate_mse(model.predict_value(valid), valid.target):.6f}"
    line += f" n_trees={len(model.trees)} best_iteration={model.best_iteration}"
    print(line)
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    try:
        data = load_dataset(args.data, model.schema, require_target=False)
        preds = model.predict_proba(data) if model.task == "binary" else model.predict_value(data)
    except UnknownLevel as e:
        raise UnknownLevelAtPredict(str(e)) from None
    header = "probability" if model.task == "binary" else "prediction"
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", header])
        for i, p in enumerate(preds):
            w.writerow([i, f"{p:.10f}"])
    print(f"wrote {len(preds)} predictions to {args.out}")
    return 0


def cmd_synth(args) -> int:
    cfg = SyntheticRainConfig(
        county_graph=args.counties,
        smoothness=args.smoothness,
        amplitude=args.amplitude,
        phase_spread=args.phase_spread,
        seed=args.seed,
        n_rows=args.n_rows,
    )
    d, truth = generate_synthetic(cfg)
    write_synthetic_csv(d, args.out)
    if args.truth:
        write_truth_csv(d, truth, args.truth)
    if args.schema_out:
        with open(args.schema_out, "w", encoding="utf-8") as fh:
            json.dump(rain_schema(cfg).to_dict(), fh, indent=2)
            fh.write("\n")
    print(f"wrote {d.n_rows} rows to {args.out}")
    return 0


def cmd_bench(args) -> int:
    cfg = BenchConfig(
        county_graph=args.counties,
        smoothness=args.smoothness,
        amplitude=args.amplitude,
        phase_spread=args.phase_spread,
        sizes=args.sizes,
        repeats=args.repeats,
        methods=args.methods,
        depths=args.depths,
        n_trees=args.n_trees,
        learning_rate=args.learning_rate,
        eval_every=args.eval_every,
        min_samples_leaf=args.min_samples_leaf,
        min_gain=args.min_gain,
        reg_lambda=args.reg_lambda,
        max_splits_to_search=args.max_splits_to_search,
        test_rows=args.test_rows,
        seed=args.seed,
    )
    rows = run_benchmark(cfg)
    write_results_csv(rows, args.out)
    print(f"wrote {len(rows)} result rows to {args.out}")
    if not args.no_plot:
        from .plots import render_benchmark_figure

        fig_path = args.plot or str(Path(args.out).with_suffix(".png"))
        render_benchmark_figure(rows, fig_path)
        print(f"wrote figure to {fig_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="terrainboost",
        description="Gradient boosted trees over structured categorical variables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="count or list connected sets and split candidates")
    p.add_argument("--graph", required=True, help="builtin:chain:N, builtin:cycle:N, builtin:grid:MxN or a JSON file")
    p.add_argument("--mode", choices=["mp", "cs", "cs_half"], help="what to enumerate")
    p.add_argument("--count", action="store_true", help="print the count (with --mode) or the full summary row")
    p.add_argument("--list", action="store_true", help="stream items one per line (needs --mode)")
    p.set_defaults(func=cmd_enumerate)

    def add_tree_flags(p, with_depth=True):
        p.add_argument("--n-trees", type=int, default=300)
        p.add_argument("--learning-rate", type=float, default=0.1)
        if with_depth:
            p.add_argument("--max-depth", type=int, default=3)
        p.add_argument("--min-samples-leaf", type=int, default=1)
        p.add_argument("--min-gain", type=float, default=0.0)
        p.add_argument("--lambda", dest="reg_lambda", type=float, default=0.0,
                       help="leaf weight penalty (default 0: no shrinkage)")
        p.add_argument("--max-splits-to-search", type=int, default=None,
                       help="cap on candidate partitions evaluated per node per feature (default: unlimited)")
        p.add_argument("--eval-every", type=int, default=20)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="fit a boosted model from a CSV and schema")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True, help="model JSON output path")
    p.add_argument("--valid", help="validation CSV for best-iteration tracking")
    p.add_argument("--cache-file", help="optional persistent split-candidate cache (JSON)")
    add_tree_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict probabilities for a CSV with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", help="generate seeded synthetic rain data plus its truth table")
    p.add_argument("--out", required=True, help="data CSV output path")
    p.add_argument("--truth", help="truth table CSV output path")
    p.add_argument("--schema-out", help="write the matching schema JSON here")
    p.add_argument("--counties", default="builtin:grid:4x5")
    p.add_argument("--smoothness", type=int, default=2)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--phase-spread", type=float, default=1.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-rows", type=int, default=10000)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="run the method comparison and write results CSV + figure")
    p.add_argument("--out", required=True, help="results CSV output path")
    p.add_argument("--plot", help="figure output path (default: results path with .png)")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    p.add_argument("--sizes", type=_int_list, default=(100, 500, 2000, 10000))
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--methods", type=_str_list, default=ALL_METHODS)
    p.add_argument("--depths", type=_int_list, default=(2, 3))
    p.add_argument("--counties", default="builtin:grid:4x5")
    p.add_argument("--smoothness", type=int, default=2)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--phase-spread", type=float, default=1.5)
    p.add_argument("--test-rows", type=int, default=20000)
    add_tree_flags(p, with_depth=False)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TerrainBoostError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
