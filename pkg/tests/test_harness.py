"""Study orchestration: seed streams, config round trips, canonical
reports, caching, and the command line wrapper.

Configs here are deliberately tiny; statistical quality is covered by
the acceptance suite.  What matters here is plumbing: determinism,
byte-stable serialization, and exit codes.
"""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from fpmex.harness import (
    StageCache,
    StudyConfig,
    build_test_function,
    canonical_json,
    derive_seed,
    emit_report,
    run_study,
)
from fpmex.measures import ProfileSpec

TINY = dict(
    mode="hydro",
    gamma=1.0,
    m=2,
    n_list=(32, 64),
    ensemble=4,
    t_end=0.1,
    probe_times=(0.05, 0.1),
    pde_grid=256,
    martingale=False,
    test_functions=(("gaussian", 1.0, 0.2, 1.0),),
)


def test_derive_seed_properties():
    a = derive_seed(1, "stream", 0)
    assert a == derive_seed(1, "stream", 0)
    assert a != derive_seed(1, "stream", 1)
    assert a != derive_seed(2, "stream", 0)
    assert a != derive_seed(1, "other", 0)
    assert 0 <= a < 2**64
    # label:index packing must not collide across the separator
    assert derive_seed(1, "ab", 11) != derive_seed(1, "ab:1", 1)


def test_config_round_trip():
    cfg = StudyConfig.from_mapping(TINY)
    again = StudyConfig.from_mapping(cfg.to_mapping())
    assert again == cfg


def test_config_validation():
    with pytest.raises(ValueError):
        StudyConfig(mode="nope")
    with pytest.raises(ValueError):
        StudyConfig(gamma=2.0)
    with pytest.raises(ValueError):
        StudyConfig(n_list=(64, 32))
    with pytest.raises(ValueError):
        StudyConfig(m=0)


def test_build_test_function_kinds():
    g = build_test_function(("gaussian", 1.0, 0.2, 1.0), 2.0)
    c = build_test_function(("cosine", 2, 0.5), 2.0)
    h = build_test_function(("hermite", 2, 1.0, 0.2, 1.0), 2.0)
    u = np.linspace(0, 2, 16, endpoint=False)
    for fn in (g, c, h):
        assert fn.value(0.0, u).shape == (16,)
    with pytest.raises(ValueError):
        build_test_function(("spline", 1.0), 2.0)


def test_canonical_json_is_stable_and_strict():
    blob = canonical_json({"b": np.float64(1.5), "a": [np.int32(2), (3, 4)]})
    assert blob == '{"a":[2,[3,4]],"b":1.5}'
    with pytest.raises(ValueError):
        canonical_json({"x": float("nan")})


def test_stage_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.delenv("FPME_CACHE_DIR", raising=False)
    cache = StageCache(str(tmp_path))
    key = {"stage": "demo", "n": 4}
    assert cache.get(key) is None
    cache.put(key, values=np.arange(5.0))
    hit = cache.get(key)
    assert np.array_equal(hit["values"], np.arange(5.0))
    assert cache.get({"stage": "demo", "n": 5}) is None


def test_report_bytes_reproduce(tmp_path, monkeypatch):
    monkeypatch.setenv("FPME_CACHE_DIR", str(tmp_path / "c1"))
    cfg = StudyConfig.from_mapping(TINY)
    rep1 = run_study(cfg, out_dir=str(tmp_path / "a"))
    emit_report(rep1, str(tmp_path / "a"))
    monkeypatch.setenv("FPME_CACHE_DIR", str(tmp_path / "c2"))
    rep2 = run_study(cfg, out_dir=str(tmp_path / "b"))
    emit_report(rep2, str(tmp_path / "b"))
    blob1 = (tmp_path / "a" / "report_hydro.json").read_bytes()
    blob2 = (tmp_path / "b" / "report_hydro.json").read_bytes()
    assert blob1 == blob2


def test_worker_count_does_not_change_bytes(tmp_path, monkeypatch):
    monkeypatch.setenv("FPME_CACHE_DIR", str(tmp_path / "c1"))
    one = run_study(StudyConfig.from_mapping({**TINY, "jobs": 1}), out_dir=str(tmp_path / "a"))
    monkeypatch.setenv("FPME_CACHE_DIR", str(tmp_path / "c2"))
    two = run_study(StudyConfig.from_mapping({**TINY, "jobs": 2}), out_dir=str(tmp_path / "b"))
    one.pop("_wall_seconds", None)
    two.pop("_wall_seconds", None)
    one["config"].pop("jobs")
    two["config"].pop("jobs")
    assert canonical_json(one) == canonical_json(two)


def test_cache_hit_reproduces_bytes(tmp_path, monkeypatch):
    monkeypatch.setenv("FPME_CACHE_DIR", str(tmp_path / "cache"))
    cfg = StudyConfig.from_mapping(TINY)
    cold = run_study(cfg, out_dir=str(tmp_path / "a"))
    warm = run_study(cfg, out_dir=str(tmp_path / "b"))
    cold.pop("_wall_seconds", None)
    warm.pop("_wall_seconds", None)
    assert canonical_json(cold) == canonical_json(warm)
    assert (tmp_path / "cache").exists()


def test_emit_report_formats(tmp_path):
    report = {
        "schema_version": 1,
        "mode": "demo",
        "config": {},
        "rows": [{"n": 32, "E": 0.5}, {"n": 64, "E": 0.25, "extra": [1, 2]}],
        "checks": {"halves": {"pass": True, "ratio": 0.5}},
        "all_pass": True,
        "_wall_seconds": 1.0,
    }
    paths = emit_report(dict(report), str(tmp_path / "j"), fmt="json")
    assert any(p.endswith("report_demo.json") for p in paths)
    data = json.loads((tmp_path / "j" / "report_demo.json").read_text())
    assert "_wall_seconds" not in data
    meta = json.loads((tmp_path / "j" / "run_meta.json").read_text())
    assert meta["wall_seconds"] == 1.0

    emit_report(dict(report), str(tmp_path / "c"), fmt="csv")
    text = (tmp_path / "c" / "report_demo.csv").read_text()
    assert text.splitlines()[0] == "n,E,extra"
    assert "32" in text

    emit_report(dict(report), str(tmp_path / "m"), fmt="md")
    text = (tmp_path / "m" / "report_demo.md").read_text()
    assert "| halves | yes |" in text

    with pytest.raises(ValueError):
        emit_report(dict(report), str(tmp_path / "x"), fmt="yaml")


def test_hydro_report_shape(tmp_path, monkeypatch):
    monkeypatch.setenv("FPME_CACHE_DIR", str(tmp_path / "cache"))
    cfg = StudyConfig.from_mapping(TINY)
    rep = run_study(cfg, out_dir=str(tmp_path))
    assert rep["mode"] == "hydro"
    assert {"rows", "series", "checks", "config"} <= set(rep)
    # one row per (n, probe time, test function)
    assert len(rep["rows"]) == len(cfg.n_list) * len(cfg.probe_times) * len(cfg.test_functions)
    row = rep["rows"][0]
    assert {"n", "t", "observable", "E", "reference"} <= set(row)
    for d in (0.1, 0.05, 0.02):
        assert f"exceed_{d:g}" in row
    series = rep["series"]
    assert series["columns"] == ["time", "value", "n", "gamma", "m", "seed", "observable"]
    assert len(series["rows"]) == len(rep["rows"]) * cfg.ensemble
    t, v, n, gamma, m, seed, label = series["rows"][0]
    assert (n, gamma, m) == (32, 1.0, 2)
    assert seed == derive_seed(cfg.master_seed, "hydro-traj-n32", 0)
    assert isinstance(label, str) and np.isfinite(v)


def test_report_json_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv("FPME_CACHE_DIR", str(tmp_path / "cache"))
    rep = run_study(StudyConfig.from_mapping(TINY), out_dir=str(tmp_path))
    emit_report(rep, str(tmp_path), fmt="json")
    parsed = json.loads((tmp_path / "report_hydro.json").read_text())
    assert parsed == rep  # emit pops the wall clock before writing


def test_series_csv_export(tmp_path, monkeypatch):
    monkeypatch.setenv("FPME_CACHE_DIR", str(tmp_path / "cache"))
    rep = run_study(StudyConfig.from_mapping(TINY), out_dir=str(tmp_path))
    paths = emit_report(rep, str(tmp_path), fmt="json")
    spath = tmp_path / "report_hydro_series.csv"
    assert str(spath) in paths
    with open(spath, newline="") as fh:
        got = list(csv.reader(fh))
    assert got[0] == ["time", "value", "n", "gamma", "m", "seed", "observable"]
    assert len(got) == 1 + len(rep["series"]["rows"])
    # observable labels contain commas; quoting must keep the column count
    assert all(len(line) == 7 for line in got)
    first = rep["series"]["rows"][0]
    assert [float(got[1][0]), float(got[1][1])] == [first[0], first[1]]
    assert got[1][6] == first[6]


def test_empty_report_is_still_valid(tmp_path):
    report = {
        "schema_version": 1,
        "mode": "hydro",
        "config": {},
        "rows": [],
        "series": {"columns": ["time", "value"], "rows": []},
        "checks": {},
        "all_pass": True,
    }
    emit_report(dict(report), str(tmp_path), fmt="json")
    parsed = json.loads((tmp_path / "report_hydro.json").read_text())
    assert parsed["rows"] == []
    emit_report(dict(report), str(tmp_path), fmt="csv")
    series_lines = (tmp_path / "report_hydro_series.csv").read_text().splitlines()
    assert series_lines == ["time,value"]


def test_config_field_aliases():
    base = {k: v for k, v in TINY.items() if k not in ("t_end", "ensemble", "probe_times")}
    cfg = StudyConfig.from_mapping(
        {**base, "output_dir": "elsewhere", "T": 0.2, "ensemble_size": 8,
         "snapshot_times": [0.1, 0.2]}
    )
    assert cfg.t_end == 0.2
    assert cfg.ensemble == 8
    assert cfg.probe_times == (0.1, 0.2)
    assert not hasattr(cfg, "output_dir")
    # a spelled-out canonical key beats its alias
    assert StudyConfig.from_mapping({**base, "t_end": 0.3, "T": 0.9}).t_end == 0.3


# -- command line -------------------------------------------------------------


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "fpmex.cli", *args],
        capture_output=True,
        text=True,
        timeout=300,
    )


def test_cli_rates_audit_exits_zero(tmp_path):
    res = run_cli("rates-audit", "--out", str(tmp_path))
    assert res.returncode == 0, res.stderr
    assert "pass  decomposition_exact" in res.stdout
    assert (tmp_path / "report_rates-audit.json").exists()


def test_cli_config_file_and_overrides(tmp_path):
    toml = tmp_path / "study.toml"
    toml.write_text(
        "\n".join(
            [
                'mode = "hydro"',
                "gamma = 1.0",
                "m = 2",
                "n_list = [32]",
                "ensemble = 2",
                "t_end = 0.05",
                "probe_times = [0.05]",
                "pde_grid = 128",
                "martingale = false",
                'test_functions = [["gaussian", 1.0, 0.2, 1.0]]',
            ]
        )
    )
    res = run_cli(
        "hydro", "--config", str(toml), "--out", str(tmp_path / "o"),
        "--format", "csv", "--seed", "7",
    )
    # tiny ensembles may fail the decay checks; both exits are legitimate here
    assert res.returncode in (0, 1)
    assert (tmp_path / "o" / "report_hydro.csv").exists()


def test_cli_output_dir_from_config(tmp_path):
    dest = tmp_path / "from_file"
    toml = tmp_path / "study.toml"
    toml.write_text(f'output_dir = "{dest}"\n')
    res = run_cli("rates-audit", "--config", str(toml))
    assert res.returncode == 0, res.stderr
    assert (dest / "report_rates-audit.json").exists()


def test_cli_bad_config_exits_two(tmp_path):
    res = run_cli("hydro", "--gamma", "2.5", "--out", str(tmp_path))
    assert res.returncode == 2
    assert "config error" in res.stderr


def test_cli_unknown_mode_usage_error():
    res = run_cli("frobnicate")
    assert res.returncode == 2
