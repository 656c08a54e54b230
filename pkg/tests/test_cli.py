import csv
import json

import numpy as np
import pytest

from clark_rif.cli import ConfigError, load_phi, main, parse_alphas, parse_complex


def run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out), "--no-timing"])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_parse_complex():
    assert parse_complex("i") == 1j
    assert parse_complex("-i") == -1j
    assert parse_complex("0.6+0.8j") == 0.6 + 0.8j


def test_parse_alphas_count():
    a = parse_alphas("count:4")
    assert np.allclose(np.abs(a), 1) and len(a) == 4
    assert parse_alphas("1,i") == [1, 1j]


def test_non_unimodular_alpha_rejected():
    with pytest.raises(ConfigError):
        parse_alphas("2")


def test_malformed_json_reports_location():
    with pytest.raises(ConfigError, match="line 1"):
        load_phi('{"p": [')


def test_compute_identity_factor(tmp_path):
    code, rep = run(tmp_path, "compute", "--phi", "z1", "--alpha", "1", "--grid", "64")
    assert code == 0 and rep["pass"]
    res = rep["results"][0]
    assert res["n_fibers"] == 64 and res["n_atoms"] == 64
    with open(res["files"]["atoms"]) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 64 and len({r["fiber"] for r in rows}) == 64
    assert all(float(r["re_z1"]) == pytest.approx(1) for r in rows)
    measure = json.loads(open(res["files"]["measure"]).read())
    assert measure["domain"] == "polydisc"


def test_compute_rif11_mass(tmp_path):
    code, rep = run(tmp_path, "compute", "--phi", "rif11", "--alpha", "i", "--grid", "128")
    assert code == 0
    # mu_alpha(T^2) = (1 - |phi(0)|^2) / |alpha - phi(0)|^2 and phi(0) = 0
    assert rep["results"][0]["total_mass"] == pytest.approx(1, abs=1e-3)


def test_compute_several_alphas_write_tagged_files(tmp_path):
    code, rep = run(tmp_path, "compute", "--phi", "z1z2", "--alpha", "1,i", "--grid", "32")
    assert code == 0
    assert (tmp_path / "out.measure.json").exists() and (tmp_path / "out.alpha1.atoms.csv").exists()


def test_output_directory_is_created(tmp_path):
    out = tmp_path / "nested" / "dir" / "z1.json"
    assert main(["compute", "--phi", "z1", "--grid", "16", "--out", str(out)]) == 0
    assert out.exists() and (out.parent / "z1.atoms.csv").exists()


def test_compute_malformed_inline_json_exits_2(tmp_path, capsys):
    code, _ = run(tmp_path, "compute", "--phi", '{"p": [[1, 0]')
    assert code == 2
    assert "line" in capsys.readouterr().err


def test_grid_out_of_bounds_exits_2(tmp_path):
    assert run(tmp_path, "compute", "--phi", "z1", "--grid", "8")[0] == 2


@pytest.mark.parametrize("name", ["z1", "z1z2"])
def test_verify(tmp_path, name):
    code, rep = run(tmp_path, "verify", "--phi", name, "--alpha", "count:64", "--grid", "128", "--trace-points", "512")
    assert code == 0 and rep["pass"]
    assert all(c["pass"] for c in rep["checks"])


def test_verify_matrix_ball(tmp_path):
    code, rep = run(tmp_path, "verify", "--phi", "det", "--alpha", "1", "--samples", "2000")
    assert code == 0 and rep["pass"]


@pytest.mark.parametrize("name", ["z1", "z1z2", "rif11"])
def test_density_agrees_with_obstruction_at_one(tmp_path, name):
    code, rep = run(tmp_path, "density", "--phi", name, "--alpha", "1", "--grid", "256")
    assert code == 0
    pred = rep["results"][0]["prediction"]
    assert pred == ("not_dense" if name == "z1" else "dense")


def test_density_rejects_matrix_ball(tmp_path):
    assert run(tmp_path, "density", "--phi", "det")[0] == 2


def test_demo_reduced(tmp_path):
    code, rep = run(tmp_path, "demo-i22", "--alpha", "i", "--samples", "1000")
    assert code == 0 and {c["name"] for c in rep["checks"]} >= {"innerness", "jacobian", "density_det"}
    assert "torus_family" in rep["results"]


def test_demo_bad_x1_exits_2(tmp_path):
    assert run(tmp_path, "demo-i22", "--x1", "1.2")[0] == 2


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"phi": "z1z2", "alpha": "i", "grid": 32}))
    code, rep = run(tmp_path, "compute", "--config", str(cfg), "--grid", "48")
    assert code == 0
    assert rep["config"]["grid"] == 48 and rep["results"][0]["n_fibers"] == 48


def test_config_unknown_key_exits_2(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"phi": "z1", "gridd": 32}))
    assert run(tmp_path, "compute", "--config", str(cfg))[0] == 2


def test_output_is_deterministic(tmp_path):
    argv = ["verify", "--phi", "rif11", "--alpha", "i", "--grid", "64", "--trace-points", "256", "--seed", "3"]
    out = tmp_path / "r.json"
    main([*argv, "--out", str(out), "--no-timing"])
    first = out.read_bytes()
    main([*argv, "--out", str(out), "--no-timing"])
    assert out.read_bytes() == first
