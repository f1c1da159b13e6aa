import json

import numpy as np
import pytest

from densgeo import PeriodicGrid, io
from densgeo.cli import config_to_argv, main
from densgeo.errors import ConfigError


def write_density(path, g, rho):
    io.write_field(path, g, rho)
    return str(path)


def test_identical_densities_have_zero_distance(tmp_path, capsys):
    g = PeriodicGrid(64)
    a = write_density(tmp_path / "a.csv", g, 1 + 0.3 * np.sin(2 * np.pi * g.x))
    assert main(["distance", a, a]) == 0
    assert json.loads(capsys.readouterr().out) == {"distance": 0.0, "kind": "fisher-rao"}


def test_distance_kinds(tmp_path, capsys):
    g = PeriodicGrid(64)
    a = write_density(tmp_path / "a.csv", g, np.ones(64))
    b = write_density(tmp_path / "b.csv", g, 1 + 0.5 * np.cos(2 * np.pi * g.x))
    for kind in ("fisher-rao", "hellinger", "bhattacharyya", "wasserstein2"):
        assert main(["distance", a, b, "--kind", kind]) == 0
        assert json.loads(capsys.readouterr().out)["distance"] > 0


def test_usage_errors_exit_1(tmp_path, capsys):
    assert main([]) == 1
    assert main(["distance", str(tmp_path / "missing.csv"), "x"]) == 1
    assert main(["flow", "fr", "--n", "48"]) == 1
    capsys.readouterr()


def test_numerical_failure_exits_2(tmp_path, capsys):
    code = main(["flow", "fr", "--n", "64", "--t-end", "5", "--out-dir", str(tmp_path)])
    assert code == 2
    assert "numerical failure" in capsys.readouterr().err


def test_config_flow_fr_breakdown_time(tmp_path, capsys):
    cfg = {"module": "flow", "operation": "fr", "grid": {"dim": 1, "n": 128},
           "params": {"t_end": 0.5}, "output_dir": str(tmp_path / "out")}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", str(path)]) == 0
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    kappa = 1 / (2 * np.sqrt(2))
    T = np.pi / (2 * kappa) + np.arctan(-1 / (2 * kappa)) / kappa
    assert rep["breakdown_time"] == pytest.approx(T, abs=1e-8)
    hdr, rows = io.read_table(tmp_path / "out" / "series.csv")
    assert hdr[:2] == ["t", "min_jac"] and rows[-1, 0] == pytest.approx(0.5)
    capsys.readouterr()


@pytest.mark.parametrize("cfg,field", [
    ({"module": "flow", "operation": "fr", "grid": {"n": 64}, "colour": 1}, "colour"),
    ({"operation": "fr"}, "module"),
    ({"module": "flow", "operation": "zz"}, "operation"),
    ({"module": "flow", "operation": "fr", "grid": {"length": 2.0}}, "grid"),
    ({"module": "spd", "operation": "qr", "params": [1]}, "params"),
])
def test_malformed_config_names_field(tmp_path, capsys, cfg, field):
    with pytest.raises(ConfigError, match=field):
        config_to_argv(cfg)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", str(path)]) == 1
    assert field in capsys.readouterr().err


def test_reproduce_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["reproduce", "--only", "8", "--out-dir", str(a)]) == 0
    assert main(["reproduce", "--only", "8", "--out-dir", str(b)]) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert "[PASS]" in capsys.readouterr().err


def test_field_csv_round_trip(tmp_path):
    for g in (PeriodicGrid(16), PeriodicGrid(8, 2)):
        rng = np.random.default_rng(0)
        v = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
        io.write_field(tmp_path / "f.csv", g, v)
        g2, w = io.read_field(tmp_path / "f.csv")
        assert g2 == g and np.array_equal(w, v)


def test_other_subcommands(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["spd", "qr", "--n", "3", "--out-dir", out]) == 0
    assert main(["madelung", "nls-check", "--n", "64", "--out-dir", out]) == 0
    assert main(["alpha", "geodesic", "--alpha", "0.5", "--n", "64", "--t-end", "0.1", "--out-dir", out]) == 0
    assert main(["flow", "ea", "--inertia", "h1", "--n", "64", "--t-end", "0.1", "--out-dir", out]) == 0
    capsys.readouterr()
