"""Command line entry point"""
import json

from app.cli import build_parser, config_from_args, main
from app.harness.experiment import load_records


def test_lowerbound_run(tmp_path):
    out = tmp_path / "lb"
    code = main(["--log-level", "WARNING", "lowerbound", "--n", "256,1024", "--p", "0.5", "--seeds", "0,1",
                 "--out", str(out)])
    assert code == 0
    records = load_records(out / "records.jsonl")
    assert len(records) == 4
    assert {r.coords["n"] for r in records} == {256, 1024}


def test_invalid_configuration_exits_2(tmp_path, capsys):
    code = main(["lowerbound", "--p", "1.5", "--out", str(tmp_path)])
    assert code == 2
    assert "invalid configuration" in capsys.readouterr().err


def test_config_file(tmp_path):
    config = {"grid": {"n": [64], "p": [0.3], "eps": [0.2]}, "seeds": [4]}
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    args = build_parser().parse_args(["lowerbound", "--config", str(path)])
    parsed = config_from_args(args)
    assert parsed.mode == "lowerbound"
    assert parsed.grid.p == [0.3]


def test_mismatched_config_mode(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"mode": "prague", "grid": {"n": [8], "p": [0.5]}, "seeds": [0]}))
    assert main(["lowerbound", "--config", str(path), "--out", str(tmp_path / "out")]) == 2


def test_single_seed_saves_artifacts():
    args = build_parser().parse_args(["partition", "--seed", "3", "--n", "30"])
    config = config_from_args(args)
    assert config.seeds == [3]
    assert config.save_artifacts


def test_color_flags():
    args = build_parser().parse_args(["color", "--n", "12", "--complete-r", "3", "--m", "400", "--delta", "0.25"])
    config = config_from_args(args)
    assert config.coloring_mode == "inflated"
    assert "delta" in config.grid_keys()


def test_summarize(tmp_path, capsys):
    out = tmp_path / "lb"
    assert main(["lowerbound", "--n", "256", "--seeds", "0,1", "--out", str(out)]) == 0
    csv = tmp_path / "scaling.csv"
    assert main(["summarize", "--records", str(out / "records.jsonl"), "--metric", "cct_lb",
                 "--normalizer", "thickness", "--out", str(csv)]) == 0
    assert csv.read_text().startswith("n,p,normalizer")
