import csv
import json

import pytest

from mcs_truth import config as config_mod
from mcs_truth.cli import main
from mcs_truth.config import ConfigError, ExperimentConfig

SMALL = {"scenario": {"T": 30, "k": 8, "n_mus": 20, "history_slots": 96}, "repetitions": 2}


@pytest.fixture
def cfg_path(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(SMALL))
    return path


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_config_round_trip():
    cfg = ExperimentConfig()
    assert config_mod.from_dict(json.loads(cfg.dumps())) == cfg
    assert cfg.seeds == [0, 1, 2, 3, 4, 5]


@pytest.mark.parametrize("bad", [
    {"scenario": {"bogus": 1}}, {"td": {"alpha": "x"}}, {"td": {"alpha": 0.5}}, {"methods": []},
    {"methods": ["dti"]}, {"repetitions": 0}, {"extra": 1}, {"scenario": {"k": 1.5}}, []])
def test_config_rejects(bad):
    with pytest.raises(ConfigError):
        config_mod.from_dict(bad)


def test_simulate(tmp_path, cfg_path):
    assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "b")]) == 0
    for name in ("reports.csv", "truth.csv", "history.csv", "population.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["config"]["scenario"]["T"] == 30


def test_malformed_config(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert main(["run", "--config", str(tmp_path / "absent.json")]) == 2


def test_io_error(tmp_path, cfg_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["simulate", "--config", str(cfg_path), "--out", str(blocker / "sub")]) == 3


def test_run_default_methods(tmp_path, cfg_path):
    out = tmp_path / "run"
    assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
    table = rows(out / "metrics.csv")
    assert [r["method"] for r in table] == ["prbtd", "wei", "cnb", "td"]
    assert json.loads((out / "config.json").read_text())["scenario"]["T"] == 30
    recs = rows(out / "rep_0" / "records_prbtd.csv")
    assert list(recs[0]) == ["slot", "mu", "region", "value", "q", "kept", "iterations", "converged"]
    assert list(rows(out / "rep_0" / "records_td.csv")[0])[0] == "method"
    assert len((out / "runs.jsonl").read_text().splitlines()) == 8


def test_run_single_method_and_seed(tmp_path, cfg_path):
    out = tmp_path / "run"
    assert main(["run", "--config", str(cfg_path), "--out", str(out), "--methods", "prbtd", "--seed", "7"]) == 0
    assert [r["method"] for r in rows(out / "metrics.csv")] == ["prbtd"]
    assert (out / "rep_8").is_dir()


def test_run_from_inputs(tmp_path, cfg_path):
    sim = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(sim)]) == 0
    out = tmp_path / "run"
    assert main(["run", "--config", str(cfg_path), "--out", str(out), "--inputs", str(sim)]) == 0
    assert len(rows(out / "metrics.csv")) == 4
    assert main(["run", "--out", str(out), "--inputs", str(tmp_path / "nothing")]) == 4


def test_sweep(tmp_path, cfg_path):
    out = tmp_path / "sw"
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out), "--axis", "sparsity",
                 "--methods", "prbtd,cnb"]) == 0
    table = rows(out / "sweep.csv")
    assert len(table) == 5 * 2
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out), "--axis", "mu"]) == 0
    assert len(rows(out / "sweep.csv")) == 2 * 4
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out), "--axis", "bursty",
                 "--values", "off,on", "--methods", "td"]) == 0
    assert len(rows(out / "sweep.csv")) == 2
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out), "--axis", "weather"]) == 2
