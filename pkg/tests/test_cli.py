import json

import numpy as np
import pytest

from hybridmech import cli
from hybridmech import config as cfgmod
from hybridmech import vanhove
from hybridmech.errors import ConfigError

FREE_ECS_SHORT = """
name = "tiny_free"
model = "classical_config"
[grid.q]
min = -6.0
max = 6.0
points = 64
[initial]
q0 = 0.0
width = 0.8
S = "q/2"
[integrator]
dt = 0.01
T = 0.2
stride = 5
[outputs]
observables = ["q", "p"]
"""


# -- configuration -------------------------------------------------------------------
def test_every_shipped_scenario_parses():
    names = cfgmod.catalog()
    assert len(names) >= 10
    for n in names:
        cfg = cfgmod.load(n)
        assert cfg.name == n
        assert cfgmod.from_dict(cfg.to_dict()) == cfg


def test_toml_and_json_agree():
    a = cfgmod.loads(FREE_ECS_SHORT)
    b = cfgmod.loads(json.dumps(a.to_dict()), "json")
    assert a == b
    assert a.integrator.steps == 20


def test_resolution_scale():
    cfg = cfgmod.load("bridge_free_fall")
    assert [a.points for a in cfg.scaled(2 / 3).axes] == [64, 64]
    with pytest.raises(ConfigError):
        cfg.scaled(0)


@pytest.mark.parametrize("text", [
    'name = "x"\nmodel = "nope"',
    'model = "classical_config"',
    FREE_ECS_SHORT.replace("points = 64", "points = 2"),
    FREE_ECS_SHORT.replace("dt = 0.01", "dt = -0.01"),
    FREE_ECS_SHORT.replace('S = "q/2"', 'S = "q/*2"'),
    "name = [",
])
def test_bad_scenarios_raise_config_error(text):
    with pytest.raises(ConfigError):
        cfg = cfgmod.loads(text)
        from hybridmech import runner

        runner.run(cfg)


# -- command line -------------------------------------------------------------------
def _write(tmp_path, text, name="s.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_run_writes_outputs_and_is_deterministic(tmp_path, capsys):
    path = _write(tmp_path, FREE_ECS_SHORT)
    blobs = []
    for k, fmt in enumerate(("csv", "csv", "json")):
        out = tmp_path / f"o{k}"
        assert cli.main(["run", path, "--out", str(out), "--format", fmt]) == 0
        files = sorted(p for p in (out / "tiny_free").rglob("*") if p.is_file())
        blobs.append({p.relative_to(out).as_posix(): p.read_bytes() for p in files})
    assert blobs[0] == blobs[1]
    assert any(k.endswith(".csv") for k in blobs[0])
    assert not any(k.endswith(".csv") for k in blobs[2])


def test_bad_config_exits_2(tmp_path, capsys):
    path = _write(tmp_path, FREE_ECS_SHORT.replace('model = "classical_config"', 'model = "x"'))
    assert cli.main(["run", path, "--out", str(tmp_path)]) == 2
    assert cli.main(["run", "no_such_scenario", "--out", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_numerical_abort_exits_3_with_diagnostic(tmp_path, capsys):
    path = _write(tmp_path, FREE_ECS_SHORT.replace("dt = 0.01", "dt = 0.2").replace("T = 0.2", "T = 0.4")
                  .replace("stride = 5", "stride = 1").replace('S = "q/2"', 'S = "5*q"'))
    assert cli.main(["run", path, "--out", str(tmp_path)]) == 3
    diag = json.loads((tmp_path / "tiny_free" / "abort.json").read_text())
    assert diag["error"] == "StabilityError" and diag["scenario"] == "tiny_free"


def test_verify_algebra_passes(tmp_path, capsys):
    assert cli.main(["verify", "algebra", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "verify_algebra.json").read_text())
    assert rep["passed"] and rep["schema_version"] >= 1


def test_verify_fails_on_sign_mutation(monkeypatch, capsys):
    original = vanhove.vanhove_of

    def flipped(F, hbar=1.0):
        op = original(F, hbar)
        terms = {key: (-c if key[0] == (0, 1) else c) for key, c in op.terms.items()}
        return vanhove.FirstOrderOperator(terms, op.dim, op.hbar)

    monkeypatch.setattr(vanhove, "vanhove_of", flipped)
    assert cli.main(["verify", "algebra"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_compare_and_list(tmp_path, capsys):
    path = _write(tmp_path, FREE_ECS_SHORT)
    assert cli.main(["compare", path, path, "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "compare_tiny_free__tiny_free" / "compare.json").read_text())
    assert rep["density_l1"] == 0.0
    assert all(v == 0.0 for v in rep["series_max_abs_diff"].values())
    capsys.readouterr()
    assert cli.main(["list"]) == 0
    assert "bridge_free_fall" in capsys.readouterr().out.split()


def test_bridge_verb_archives_mixture(tmp_path, capsys):
    assert cli.main(["bridge", "bridge_free_fall", "--out", str(tmp_path), "--resolution-scale", "0.667"]) == 0
    d = tmp_path / "bridge_free_fall_bridge"
    assert (d / "mixture_t0" / "index.json").is_file() and (d / "mixture_T" / "index.json").is_file()
    assert cli.main(["bridge", "free_ecs", "--out", str(tmp_path)]) == 2


def test_csv_handles_missing_values():
    text = cli.series_csv([{"t": 0.0, "a": 1.0}, {"t": 0.1, "b": np.float64(2.0)}])
    assert text.splitlines() == ["t,a,b", "0.0,1.0,", "0.1,,2.0"]
