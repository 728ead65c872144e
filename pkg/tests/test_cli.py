import csv
import json
import os

import pytest

from dsspan.cli import PUBLISHED_VALUES, build_config, main
from dsspan.graph import make_dataset, write_tu_dataset

from conftest import random_corpus


@pytest.fixture
def toy_dir(tmp_path):
    # 24 graphs, 12 per class, stratifiable into 3 folds
    graphs, labels = [], []
    for seed in range(6):
        ds = random_corpus(seed)
        for g in ds.graphs[:4]:
            graphs.append((g.vertex_labels, [tuple(e) for e in g.edges]))
            labels.append(len(labels) % 2)
    d = tmp_path / "TOY"
    write_tu_dataset(make_dataset(graphs, labels, name="TOY", class_count=2), str(d))
    return d


def common(toy_dir, out):
    return ["--dataset", "TOY", "--data-dir", str(toy_dir), "--out-dir", str(out),
            "--delta", "0.3", "--min-cov", "2", "--max-edges", "3", "--dim", "8",
            "--repetitions", "1", "--folds", "3", "--workers", "1"]


def err_line(capsys):
    err = capsys.readouterr().err.strip()
    assert "\n" not in err
    return err


def test_print_config_tags_provenance(capsys):
    assert main(["print-config", "--format", "json", "--seed", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    cfg = doc["config"]
    for path in PUBLISHED_VALUES:
        assert cfg[path]["source"] == "paper"
    assert cfg["miner.delta"]["source"] == "default"
    assert cfg["protocol.seed"] == {"value": 3, "source": "flag"}
    assert cfg["model.epochs"]["value"] == 5
    assert cfg["protocol.repetitions"]["value"] == 10
    assert doc["version"]


def test_flag_overrides_file(tmp_path):
    cfg, src = build_config({"miner": {"delta": 0.2, "gamma": 4}}, {"miner.delta": 0.05})
    assert cfg.miner.delta == 0.05 and src["miner.delta"] == "flag"
    assert cfg.miner.gamma == 4 and src["miner.gamma"] == "file"
    cfg, _ = build_config({"miner": {"gamma": "none"}}, {})
    assert cfg.miner.gamma is None


@pytest.mark.parametrize("doc, path", [
    ("miner:\n  delta: 1.5\n", "miner.delta"),
    ("miner:\n  min_cov: 0\n", "miner.min_cov"),
    ("selector:\n  tau: abc\n", "selector.tau"),
    ("model:\n  bogus: 1\n", "model.bogus"),
    ("protocol:\n  folds: 1\n", "protocol.folds"),
])
def test_invalid_config_reports_field_path(tmp_path, capsys, doc, path):
    f = tmp_path / "bad.yaml"
    f.write_text(doc)
    assert main(["print-config", "--config", str(f)]) == 2
    assert err_line(capsys).startswith(f"error: config: {path}")


def test_missing_dataset(tmp_path, capsys):
    assert main(["validate-dataset", "--dataset", "NOPE", "--data-dir", str(tmp_path)]) == 2
    assert err_line(capsys).startswith("error: dataset: missing file")


def test_usage_error_is_one_line(capsys):
    assert main(["evaluate", "--folds", "x"]) == 2
    assert err_line(capsys).startswith("error: usage:")


def test_validate_dataset(toy_dir, capsys):
    assert main(["validate-dataset", "--dataset", "TOY", "--data-dir", str(toy_dir)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["graphs"] == 24 and info["class_counts"] == [12, 12]


def test_mine_then_select(toy_dir, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["mine", *common(toy_dir, out)]) == 0
    mining = json.loads((out / "mining.json").read_text())
    assert mining["candidates"]
    assert main(["select", *common(toy_dir, out), "--mining", str(out / "mining.json")]) == 0
    sel = json.loads((out / "selection.json").read_text())
    assert sel["selected"]
    mined_codes = {c["code"] for c in mining["candidates"]}
    assert {s["code"] for s in sel["selected"]} <= mined_codes
    igs = [s["ig"] for s in sel["selected"]]
    assert igs == sorted(igs, reverse=True)
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "select"


def test_select_rejects_mismatched_mining(toy_dir, tmp_path, capsys):
    bad = tmp_path / "m.json"
    bad.write_text("{}")
    assert main(["select", *common(toy_dir, tmp_path), "--mining", str(bad)]) == 2
    assert err_line(capsys).startswith("error: input:")


def test_evaluate_outputs_and_determinism(toy_dir, tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["evaluate", *common(toy_dir, a), "--seed", "7", "--export"]) == 0
    assert main(["evaluate", *common(toy_dir, b), "--seed", "7"]) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    for name in ("timings.json", "folds.csv", "summary.csv", "manifest.json",
                 "features.csv", "embeddings.csv"):
        assert (a / name).exists(), name
    assert len(os.listdir(a / "folds")) == 3
    with open(a / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["dataset", "mean_acc", "std", "avg_features", "avg_mine_seconds"]
    man = json.loads((a / "manifest.json").read_text())
    assert man["seed"] == 7 and man["config"]["protocol.seed"]["value"] == 7
    with open(a / "embeddings.csv") as fh:
        header = next(csv.reader(fh))
    assert header[:3] == ["graph", "label", "e0"] and len(header) == 2 + 8


def test_bench_csv(toy_dir, tmp_path, capsys):
    out = tmp_path / "bench"
    assert main(["bench", *common(toy_dir, out), "--set", "bench.max_edges=3"]) == 0
    with open(out / "bench.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["mode"] for r in rows] == ["capped", "baseline"]
    assert set(rows[0]) == {"dataset", "mode", "avg_mine_seconds", "avg_feature_count",
                            "mean_acc", "std"}
    assert all(r["dataset"] == "TOY" for r in rows)
