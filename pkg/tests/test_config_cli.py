import csv
import json

import numpy as np
import pytest

from mtlab import cli
from mtlab.config import (DEFAULTS, EXPERIMENTS, ConfigError, _parser, apply_override,
                          canonical_text, eval_constant, load_config)


# --- configuration --------------------------------------------------------------

def test_defaults():
    cfg = load_config("maximize", env={})
    assert cfg.domain == "interval" and cfg.T is None and cfg.N is None
    assert cfg.alphas == pytest.approx([np.pi - 1 / k for k in (4, 8, 16, 32, 64)])
    assert cfg.eps_list == [1e-3, 1e-4, 1e-5, 1e-6]
    assert cfg.out_dir == "mtlab_out"


def test_canonical_round_trip(tmp_path):
    cfg = load_config("sweep-subcritical", overrides=["grid.T=1", "N=1025", "k_values=4,8"], env={})
    path = tmp_path / "c.ini"
    path.write_text(cfg.canonical)
    again = load_config("sweep-subcritical", str(path), env={})
    assert again.canonical == cfg.canonical
    assert again.config_hash == cfg.config_hash
    assert again.T == 1.0 and again.N == 1025 and len(again.alphas) == 2


def test_hash_depends_on_experiment_not_output_env():
    a = load_config("sharpness", env={})
    b = load_config("testfn-bound", env={})
    c = load_config("sharpness", env={"MTLAB_OUT": "/tmp/elsewhere"})
    assert a.config_hash != b.config_hash
    assert a.config_hash == c.config_hash and c.out_dir == "/tmp/elsewhere"
    assert c.output_path(".csv") == f"/tmp/elsewhere/sharpness-{a.config_hash}.csv"


@pytest.mark.parametrize("item", ["nokey", "bogus=1", "grid.bogus=1", "nosection.T=1"])
def test_bad_overrides(item):
    with pytest.raises(ConfigError):
        apply_override(_parser(), item)


@pytest.mark.parametrize("overrides", [["grid.N=1024", "grid.T=1"], ["grid.N=513"],
                                       ["problem.domain=disk"], ["workers=0"], ["tol=2"],
                                       ["eps_list=1e-3,-1"], ["alpha=foo"], ["max_iter=x"]])
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        load_config("maximize", overrides=overrides, env={})


def test_unknown_experiment_and_sections(tmp_path):
    with pytest.raises(ConfigError):
        load_config("nope", env={})
    bad = tmp_path / "bad.ini"
    bad.write_text("[extra]\nx = 1\n")
    with pytest.raises(ConfigError):
        load_config("maximize", str(bad), env={})
    bad.write_text("not a config\n")
    with pytest.raises(ConfigError):
        load_config("maximize", str(bad), env={})
    with pytest.raises(ConfigError):
        load_config("maximize", str(tmp_path / "missing.ini"), env={})


@pytest.mark.parametrize("text,val", [("0.5", 0.5), ("pi", np.pi), ("0.9*pi", 0.9 * np.pi),
                                      ("pi-0.25", np.pi - 0.25), ("2*pi+1", 2 * np.pi + 1)])
def test_eval_constant(text, val):
    assert eval_constant(text) == pytest.approx(val, rel=1e-15)


def test_eval_constant_rejects():
    with pytest.raises(ValueError):
        eval_constant("__import__('os')")


def test_every_default_key_in_canonical():
    text = canonical_text(_parser())
    for sec, keys in DEFAULTS.items():
        assert f"[{sec}]" in text
        for k in keys:
            assert f"\n{k} = " in text


# --- command line --------------------------------------------------------------

@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("MTLAB_OUT", str(tmp_path / "out"))
    return tmp_path / "out"


def _json(outdir):
    files = sorted(outdir.glob("*.json"))
    assert len(files) == 1
    return json.loads(files[0].read_text())


def test_malformed_config_exit_2(tmp_path, outdir):
    bad = tmp_path / "bad.ini"
    bad.write_text("[grid]\nN = 1024\nT = 1\n")
    assert cli.main(["maximize", "--config", str(bad)]) == 2
    assert cli.main(["maximize", "--set", "nonsense=1"]) == 2
    assert cli.main(["not-an-experiment"]) == 2
    assert not outdir.exists()


def test_verify_bubble(outdir):
    assert cli.main(["run", "verify-bubble"]) == 0
    doc = _json(outdir)
    res = doc["results"]
    assert res["liouville_residual"] < 1e-3 and res["mass_error"] < 1e-4
    assert doc["versions"]["numpy"] == np.__version__
    assert len(doc["config_hash"]) == 12


def test_testfn_bound_deterministic(outdir):
    args = ["testfn-bound", "--family", "interval", "--eps", "1e-4"]
    assert cli.main(args) == 0
    csvs = list(outdir.glob("*.csv"))
    first = csvs[0].read_bytes()
    assert cli.main(args) == 0
    assert csvs[0].read_bytes() == first
    lines = first.decode().splitlines()
    assert lines[0].startswith("# config_hash=")
    rows = list(csv.DictReader(lines[1:]))
    assert float(rows[0]["margin"]) > 0
    assert float(rows[0]["norm_sq"]) <= 1 + 1e-8


def test_worker_pool_keeps_order(tmp_path, monkeypatch):
    outs = []
    for w in (1, 2):
        d = tmp_path / f"w{w}"
        monkeypatch.setenv("MTLAB_OUT", str(d))
        assert cli.main(["testfn-bound", "--family", "line", "--eps", "1e-3,1e-4",
                         "--workers", str(w)]) == 0
        outs.append(next(d.glob("*.csv")).read_text().splitlines()[1:])
    assert outs[0] == outs[1]


def test_maximize_small_grid(outdir):
    assert cli.main(["maximize", "--alpha", "0.5", "--set", "grid.T=1", "--set", "grid.N=513"]) == 0
    doc = _json(outdir)
    assert doc["results"]["converged"]
    assert list(outdir.glob("*.csv"))


def test_sweep_and_blowup(outdir):
    assert cli.main(["sweep-subcritical", "--set", "k_values=4,8", "--set", "grid.T=1",
                     "--set", "grid.N=513"]) == 0
    assert cli.main(["blowup-diagnostics", "--set", "mu_values=4,6"]) == 0
    docs = [json.loads(p.read_text()) for p in outdir.glob("*.json")]
    assert {d["experiment"] for d in docs} == {"sweep-subcritical", "blowup-diagnostics"}


def test_sharpness(outdir):
    assert cli.main(["sharpness"]) == 0
    res = _json(outdir)["results"]
    assert res["growth_supercritical"] > 1
    assert len(res["rows"]) == 4


def test_greens_dump(tmp_path, capsys):
    assert cli.main(["greens", "dump", "--which", "interval", "--probe-grid=-0.5:0.5:3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "x,y,G,S" and len(out) == 1 + 6
    path = tmp_path / "g.csv"
    assert cli.main(["greens", "dump", "--which", "line", "--output", str(path)]) == 0
    assert path.read_text().startswith("x,y,G,S")
    assert cli.main(["greens", "dump", "--which", "line", "--probe-grid", "1:2"]) == 2
    assert cli.main(["greens", "dump", "--which", "interval", "--probe-grid=-1.5:1.5:3"]) == 2


def test_testfns_sweep(tmp_path):
    path = tmp_path / "t.csv"
    assert cli.main(["testfns", "sweep", "--family", "line", "--eps-list", "1e-4",
                     "--output", str(path)]) == 0
    rows = list(csv.DictReader(path.read_text().splitlines()))
    assert float(rows[0]["value"]) > float(rows[0]["threshold"])
    bad = tmp_path / "bad.csv"
    assert cli.main(["testfns", "sweep", "--family", "line", "--eps-list", "0.1",
                     "--output", str(bad)]) == 2
    assert not bad.exists()


def test_experiments_registered():
    assert set(cli.RUNNERS) == set(EXPERIMENTS)
