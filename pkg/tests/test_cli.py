import json

import pytest

from terrainboost.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_enumerate_mp_count(capsys):
    code, out, _ = run_cli(capsys, "enumerate", "--graph", "builtin:grid:4x4", "--mode", "mp", "--count")
    assert code == 0
    assert out.strip() == "627"


def test_enumerate_cs_half_count(capsys):
    code, out, _ = run_cli(capsys, "enumerate", "--graph", "builtin:grid:5x5", "--mode", "cs_half", "--count")
    assert code == 0
    assert out.strip() == "285938"


def test_enumerate_chain_mp(capsys):
    code, out, _ = run_cli(capsys, "enumerate", "--graph", "builtin:chain:5", "--mode", "mp", "--count")
    assert code == 0
    assert out.strip() == "4"


def test_enumerate_summary_row(capsys):
    code, out, _ = run_cli(capsys, "enumerate", "--graph", "builtin:grid:3x3", "--count")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "name,n_levels,n_edges,mp,cs_half,cs"
    assert lines[1] == "grid:3x3,9,12,53,79,218"


def test_enumerate_list_mode(capsys):
    code, out, _ = run_cli(capsys, "enumerate", "--graph", "builtin:chain:3", "--mode", "mp", "--list")
    assert code == 0
    assert out.splitlines() == ["c0 | c1,c2", "c0,c1 | c2"]


def test_enumerate_bad_graph_nonzero_exit(capsys):
    code, _, err = run_cli(capsys, "enumerate", "--graph", "builtin:grid:0x5", "--mode", "mp", "--count")
    assert code != 0
    assert "error" in err


@pytest.fixture
def toy_files(tmp_path):
    graph = {"name": "abc", "levels": ["a", "b", "c"], "edges": [["a", "b"], ["b", "c"]]}
    gpath = tmp_path / "abc.json"
    gpath.write_text(json.dumps(graph))
    schema = {
        "target": "y",
        "task": "binary",
        "features": [{"name": "f", "kind": "structured", "graph": str(gpath)}],
    }
    spath = tmp_path / "schema.json"
    spath.write_text(json.dumps(schema))
    rows = ["f,y"] + ["a,0", "a,0", "b,0", "b,0", "c,1", "c,1"]
    dpath = tmp_path / "train.csv"
    dpath.write_text("\n".join(rows) + "\n")
    return tmp_path, spath, dpath


def test_train_reproduces_toy_split(capsys, toy_files):
    tmp_path, spath, dpath = toy_files
    out_model = tmp_path / "model.json"
    code, out, _ = run_cli(
        capsys,
        "train", "--data", str(dpath), "--schema", str(spath), "--out", str(out_model),
        "--n-trees", "1", "--max-depth", "1", "--learning-rate", "1.0",
    )
    assert code == 0
    assert "train_logloss=" in out
    doc = json.loads(out_model.read_text())
    root = doc["trees"][0]["nodes"][0]
    branch_levels = sorted(tuple(sorted(b["levels"])) for b in root["branches"])
    assert branch_levels == [("a", "b"), ("c",)]


def test_train_same_seed_byte_identical(capsys, toy_files):
    tmp_path, spath, dpath = toy_files
    m1, m2 = tmp_path / "m1.json", tmp_path / "m2.json"
    for out_model in (m1, m2):
        code, _, _ = run_cli(
            capsys,
            "train", "--data", str(dpath), "--schema", str(spath), "--out", str(out_model),
            "--n-trees", "3", "--max-depth", "2", "--seed", "5",
        )
        assert code == 0
    assert m1.read_bytes() == m2.read_bytes()


def test_train_missing_graph_file_fails(capsys, tmp_path):
    schema = {
        "target": "y",
        "task": "binary",
        "features": [{"name": "f", "kind": "structured", "graph": str(tmp_path / "nope.json")}],
    }
    spath = tmp_path / "schema.json"
    spath.write_text(json.dumps(schema))
    dpath = tmp_path / "train.csv"
    dpath.write_text("f,y\na,0\n")
    code, _, err = run_cli(
        capsys, "train", "--data", str(dpath), "--schema", str(spath), "--out", str(tmp_path / "m.json")
    )
    assert code != 0
    assert "error" in err


def test_predict_round_trip(capsys, toy_files):
    tmp_path, spath, dpath = toy_files
    out_model = tmp_path / "model.json"
    run_cli(capsys, "train", "--data", str(dpath), "--schema", str(spath), "--out", str(out_model),
            "--n-trees", "2", "--max-depth", "1", "--learning-rate", "1.0")
    new_data = tmp_path / "new.csv"
    new_data.write_text("f\nc\na\n")
    out_csv = tmp_path / "preds.csv"
    code, _, _ = run_cli(capsys, "predict", "--model", str(out_model), "--data", str(new_data), "--out", str(out_csv))
    assert code == 0
    lines = out_csv.read_text().strip().splitlines()
    assert lines[0] == "row,probability"
    p_c = float(lines[1].split(",")[1])
    p_a = float(lines[2].split(",")[1])
    assert p_c > p_a  # level c carried all the positives


def test_predict_unknown_level_reports_row(capsys, toy_files):
    tmp_path, spath, dpath = toy_files
    out_model = tmp_path / "model.json"
    run_cli(capsys, "train", "--data", str(dpath), "--schema", str(spath), "--out", str(out_model),
            "--n-trees", "1", "--max-depth", "1")
    bad = tmp_path / "bad.csv"
    bad.write_text("f\na\nzebra\n")
    code, _, err = run_cli(capsys, "predict", "--model", str(out_model), "--data", str(bad), "--out", str(tmp_path / "p.csv"))
    assert code != 0
    assert "row 2" in err and "zebra" in err


def test_synth_deterministic_and_schema_out(capsys, tmp_path):
    args = ["synth", "--out", None, "--truth", None, "--schema-out", None,
            "--seed", "9", "--n-rows", "200"]
    outputs = []
    for tag in ("one", "two"):
        data = tmp_path / f"d_{tag}.csv"
        truth = tmp_path / f"t_{tag}.csv"
        schema = tmp_path / f"s_{tag}.json"
        argv = ["synth", "--out", str(data), "--truth", str(truth), "--schema-out", str(schema),
                "--seed", "9", "--n-rows", "200"]
        code = main(argv)
        capsys.readouterr()
        assert code == 0
        outputs.append((data.read_bytes(), truth.read_bytes(), schema.read_bytes()))
    assert outputs[0] == outputs[1]
    doc = json.loads(outputs[0][2])
    assert doc["target"] == "rain"


def test_synth_then_train_pipeline(capsys, tmp_path):
    data = tmp_path / "rain.csv"
    schema = tmp_path / "rain_schema.json"
    code = main(["synth", "--out", str(data), "--schema-out", str(schema),
                 "--seed", "2", "--n-rows", "400", "--counties", "builtin:grid:2x3"])
    capsys.readouterr()
    assert code == 0
    model = tmp_path / "rain_model.json"
    code, out, _ = run_cli(capsys, "train", "--data", str(data), "--schema", str(schema),
                           "--out", str(model), "--n-trees", "5", "--max-depth", "2")
    assert code == 0
    assert model.exists()


def test_bench_cli_writes_csv_and_figure(capsys, tmp_path):
    out_csv = tmp_path / "results.csv"
    code, out, _ = run_cli(
        capsys,
        "bench", "--out", str(out_csv), "--sizes", "60", "--repeats", "1", "--depths", "2",
        "--methods", "structured,siloed", "--n-trees", "4", "--eval-every", "2",
        "--test-rows", "200", "--counties", "builtin:grid:2x3",
    )
    assert code == 0
    assert out_csv.exists()
    fig = tmp_path / "results.png"
    assert fig.exists() and fig.stat().st_size > 0
    header = out_csv.read_text().splitlines()[0]
    assert header == "method,size,repeat,logloss,best_iteration,max_depth"


def test_bench_cli_no_plot(capsys, tmp_path):
    out_csv = tmp_path / "r2.csv"
    code, _, _ = run_cli(
        capsys,
        "bench", "--out", str(out_csv), "--sizes", "60", "--repeats", "1", "--depths", "2",
        "--methods", "siloed", "--test-rows", "200", "--counties", "builtin:grid:2x3", "--no-plot",
    )
    assert code == 0
    assert not (tmp_path / "r2.png").exists()
