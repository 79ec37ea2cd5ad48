import json
import math

import pytest

from floqflux.cli import angle, main
from floqflux.runner import ConfigError, output_root, run


def test_angle_parser():
    assert angle("pi/2") == math.pi / 2
    assert angle("3pi/4") == 3 * math.pi / 4
    assert angle("-0.5*pi") == -math.pi / 2
    assert angle("0.25") == 0.25
    with pytest.raises(Exception):
        angle("tau")


def test_output_root_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FLOQFLUX_OUTPUT_ROOT", str(tmp_path / "x"))
    assert output_root() == tmp_path / "x"


def test_kz_default_summary(tmp_path):
    s = run({"kind": "kz"}, tmp_path)
    assert abs(s["results"]["l_dec"] - 9.45) <= 0.1
    doc = json.loads((tmp_path / "kz" / "summary.json").read_text())
    assert doc["inputs"] == {"kind": "kz"}
    assert {"floqflux", "numpy", "scipy", "kernel_backend"} <= set(doc["versions"])
    assert "seconds" in doc["timings"]


def test_magnus_check_summary(tmp_path):
    s = run({"kind": "magnus-check", "model": {"phi": math.pi / 2, "sector": [2]}}, tmp_path)
    assert s["results"]["max_abs_diff"] < 1e-12


def test_missing_kind_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {}}))
    assert main(["run", str(cfg)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["keys"] == ["kind"] and "kind" in err["message"]


def test_unknown_keys_listed():
    with pytest.raises(ConfigError) as e:
        run({"kind": "kz", "colour": 1, "size": 2})
    assert e.value.keys == ["colour", "size"]
    with pytest.raises(ConfigError) as e:
        run({"kind": "kz", "params": {"xi": 1}})
    assert e.value.keys == ["xi"]
    with pytest.raises(ConfigError):
        run({"kind": "spectrum", "model": {"flux": 1}})
    with pytest.raises(ConfigError):
        run({"kind": "teleport"})


def test_module_abort_exit_code(capsys):
    rc = main(["pump", "--dims", "4", "4", "--boundary", "open", "periodic", "--mu", "10",
               "--J-par", "2", "--phi", "pi/2", "--sector", "2", "2", "--npoints", "9",
               "--workers", "1"])
    assert rc == 1
    assert "gap closing" in json.loads(capsys.readouterr().err)["message"]


def test_cli_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "k.json"
    cfg.write_text(json.dumps({"kind": "kz", "params": {"t_dec": 50.0}}))
    assert main(["kz", "--config", str(cfg), "--t-dec", "200", "--output-dir", "o"]) == 0
    out = json.loads(capsys.readouterr().out)
    from floqflux.kz import KZParams, domain_length
    assert out["l_dec"] == domain_length(KZParams(t_dec=200.0))


def test_wires_and_drive_subcommands(capsys):
    assert main(["wires", "--pq", "1", "0", "--na", "1/4", "--nb", "1/4"]) == 0
    rows = json.loads(capsys.readouterr().out)["table"]
    assert rows[0]["sigma_xy"] == "2/3"
    assert main(["drive-validate", "--workers", "1"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["flux_homogeneous_pi_over_2"] and rep["ownership_ok"]
    assert rep["frequencies"]["omega_hz"] == 5000.0


def _csv_bytes(root, name):
    return {p.name: p.read_bytes() for p in (root / name).glob("*.csv")}


@pytest.mark.parametrize("cfg", [
    {"kind": "spectrum", "model": {"phi": math.pi / 2, "sector": [2, 1]}, "params": {"k": 4}},
    {"kind": "chain-oracle", "params": {"L": 3}},
    {"kind": "nk", "params": {"L": 6, "Na": 2, "Nb": 1}},
    {"kind": "kz", "params": {"vary": "t_dec", "grid": [50, 100, 200]}},
])
def test_rerun_is_byte_identical(tmp_path, cfg):
    run(dict(cfg, output_dir="a"), tmp_path)
    run(dict(cfg, output_dir="b"), tmp_path)
    a, b = _csv_bytes(tmp_path, "a"), _csv_bytes(tmp_path, "b")
    assert a and a == b


def test_workers_do_not_change_outputs(tmp_path):
    cfg = {"kind": "flow", "model": {"phi": math.pi / 2, "sector": [2, 1]}, "params": {"npoints": 8}}
    run(dict(cfg, output_dir="w1", workers=1), tmp_path)
    run(dict(cfg, output_dir="w3", workers=3), tmp_path)
    assert _csv_bytes(tmp_path, "w1") == _csv_bytes(tmp_path, "w3")


def test_csv_headers_carry_units(tmp_path):
    run({"kind": "chain-oracle", "params": {"L": 2}}, tmp_path)
    head = (tmp_path / "chain-oracle" / "oracle.csv").read_text().splitlines()[0]
    assert head == "Na,Nb,dim,max_abs_diff[J]"
