import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sfperc import io
from sfperc.config import KEYS, OUT_ENV, ExperimentConfig, config_from_string, load_config, parse_ini
from sfperc.errors import ConfigError
from sfperc.graphgen import ModelParams, build_graph_cell
from sfperc.pointprocess import BoxGeometry, sample_ppp
from sfperc.weights import WeightLaw, sample_weights


def _graph(law=WeightLaw.log_power(2.5, 1.0, 2.0), topology="torus"):
    params = ModelParams(2, 3.5, law, 1.3)
    ps = sample_ppp(BoxGeometry(2, 10.0, topology), params.intensity, 4)
    wv = sample_weights(law, len(ps), 5)
    return ps, wv, build_graph_cell(ps, wv, params, 6)


def test_dumps_deterministic_and_clean():
    obj = {"b": np.float64(0.1), "a": [np.int64(3), math.inf, -math.inf], "c": np.array([1.5, 2.5]), "d": np.bool_(1)}
    text = io.dumps(obj)
    assert text == io.dumps(dict(reversed(list(obj.items()))))
    assert json.loads(text) == {"a": [3, "inf", "-inf"], "b": 0.1, "c": [1.5, 2.5], "d": True}
    assert io.dumps({"x": math.nan}) == '{\n  "x": "nan"\n}'


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_dumps_float_round_trip(x):
    assert json.loads(io.dumps({"x": x}))["x"] == x


@pytest.mark.parametrize("topology", ["torus", "free"])
def test_pointset_round_trip(tmp_path, topology):
    ps, wv, _ = _graph(topology=topology)
    path = io.write_pointset(tmp_path / "p.jsonl", ps, wv)
    ps2, wv2 = io.read_pointset(path)
    assert ps2 == ps
    assert np.array_equal(wv2.values, wv.values) and wv2.seed == wv.seed and wv2.law == wv.law
    bare = io.write_pointset(tmp_path / "q.jsonl", ps)
    ps3, wv3 = io.read_pointset(bare)
    assert ps3 == ps and wv3 is None
    # byte-identical rewrite
    again = io.write_pointset(tmp_path / "r.jsonl", ps2, wv2)
    assert io.file_digest(again) == io.file_digest(path)


def test_graph_round_trip(tmp_path):
    _, _, g = _graph()
    path = io.write_graph(tmp_path / "g.jsonl", g)
    g2 = io.read_graph(path)
    assert g2.same_edges(g)
    assert g2.params == g.params and g2.edge_seed == g.edge_seed
    assert np.array_equal(g2.points.points, g.points.points)
    assert np.array_equal(g2.weights.values, g.weights.values)


def test_reader_errors(tmp_path):
    ps, wv, g = _graph()
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    with pytest.raises(ConfigError):
        io.read_pointset(empty)
    gpath = io.write_graph(tmp_path / "g.jsonl", g)
    with pytest.raises(ConfigError):
        io.read_pointset(gpath)
    ppath = io.write_pointset(tmp_path / "p.jsonl", ps, wv)
    lines = ppath.read_text().splitlines()
    (tmp_path / "short.jsonl").write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(ConfigError):
        io.read_pointset(tmp_path / "short.jsonl")
    header = json.loads(lines[0])
    header["version"] = 99
    (tmp_path / "v.jsonl").write_text("\n".join([json.dumps(header)] + lines[1:]) + "\n")
    with pytest.raises(ConfigError):
        io.read_pointset(tmp_path / "v.jsonl")
    glines = gpath.read_text().splitlines()
    (tmp_path / "gshort.jsonl").write_text("\n".join(glines[:-1]) + "\n")
    with pytest.raises(ConfigError):
        io.read_graph(tmp_path / "gshort.jsonl")
    with pytest.raises(ValueError):
        io.write_pointset(tmp_path / "bad.jsonl", ps, sample_weights(wv.law, len(ps) + 1, 0))


def test_csv_writers(tmp_path):
    path = io.write_tail_csv(tmp_path / "t.csv", [0, 1, 2], [0.75, 0.25, 0.0])
    rows = list(csv.reader(path.open()))
    assert rows == [["s", "P(D>s)"], ["0", "0.75"], ["1", "0.25"], ["2", "0.0"]]
    path = io.write_csv(tmp_path / "c.csv", ["a", "b"], [(1, 0.1)])
    assert path.read_text() == "a,b\n1,0.1\n"


def test_estimator_record():
    rec = io.estimator_record("op", {"k": 3}, {"edges": 9}, 1.5, 2.0)
    assert rec == {"operation": "op", "params": {"k": 3}, "seeds": {"edges": 9}, "value": 1.5, "runtime_ms": 2.0}
    assert io.estimator_record("op", {}, {}, 1.0, 0.0, stderr=0.1, ci=[0, 2])["ci"] == [0, 2]


# configuration


def test_config_defaults_and_derived_objects():
    cfg = ExperimentConfig()
    assert cfg.run == ("degrees", "tail", "cc")
    assert cfg.model == ModelParams(2, 4.0, WeightLaw.pareto(2.5), 1.0)
    assert cfg.geometry == BoxGeometry(2, 64.0)
    assert cfg.replace(law="log_power", a=1.0).weight_law == WeightLaw.log_power(2.5, 1.0, 1.0)
    assert cfg.replace(law="constant", c=2.0).weight_law == WeightLaw.constant(2.5, 2.0)
    assert cfg.derived_seed("points") != cfg.derived_seed("weights")
    assert cfg.derived_seed("points") == ExperimentConfig().derived_seed("points")
    assert {k.name for k in KEYS} == set(cfg.to_dict())


def test_config_ini_round_trip(tmp_path):
    cfg = ExperimentConfig(d=3, alpha=5.5, tau=2.25, side=12.5, topology="free", run="tail,palm-cc",
                           hill_k=12, seed=17, format="csv", engine="naive")
    assert config_from_string(cfg.to_ini()) == cfg
    path = cfg.write(tmp_path / "c.ini")
    assert load_config(path) == cfg
    assert load_config(path, {"seed": 3, "alpha": None}) == cfg.replace(seed=3)
    assert load_config(path, {"alpha": "6.5"}).alpha == 6.5


@pytest.mark.parametrize("changes", [
    {"run": "degrees,unknown"}, {"law": "lognormal"}, {"topology": "sphere"}, {"seed": -1}, {"threads": 0},
    {"replicas": 1}, {"hill_k": -2}, {"tau": 1.0}, {"alpha": -1.0}, {"side": 0.0}, {"d": 0}, {"format": "xml"},
    {"law": "log_power", "a": 3.0},
])
def test_config_validation(changes):
    with pytest.raises(ConfigError):
        ExperimentConfig(**changes)


def test_config_parse_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_ini("[model]\nbeta = 1\n")
    with pytest.raises(ConfigError):
        parse_ini("[geometry]\nalpha = 4\n")
    with pytest.raises(ConfigError):
        parse_ini("[model]\nalpha = four\n")
    with pytest.raises(ConfigError):
        parse_ini("[model]\nalpha = nan\n")
    with pytest.raises(ConfigError):
        parse_ini("alpha = 4\n")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")
    with pytest.raises(ConfigError):
        load_config(None, {"nope": 1})


def test_out_dir_precedence(monkeypatch):
    monkeypatch.delenv(OUT_ENV, raising=False)
    assert str(ExperimentConfig().out_dir()) == "sfperc-out"
    monkeypatch.setenv(OUT_ENV, "/tmp/envout")
    assert str(ExperimentConfig().out_dir()) == "/tmp/envout"
    assert str(ExperimentConfig(out="explicit").out_dir()) == "explicit"
