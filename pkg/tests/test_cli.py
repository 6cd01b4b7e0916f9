import json
import os

import numpy as np
import pytest

from dlab.cli import main
from dlab.fileio import read_grid_function, write_grid_function
from dlab.grid import FOURIER, Grid, GridFunction


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_sample(path, n=256):
    g = Grid(n, 16 * np.pi, -8 * np.pi)
    x = g.nodes()
    f = GridFunction(g, np.exp(-x ** 2 / 2.0).astype(complex))
    write_grid_function(f, path)
    return f


def test_verify_exponents_passes_and_is_deterministic(capsys):
    code1, out1, _ = run(capsys, "verify", "exponents", "--no-timestamps")
    code2, out2, _ = run(capsys, "verify", "exponents", "--no-timestamps")
    assert code1 == 0 and code2 == 0
    assert out1 == out2
    payload = json.loads(out1)
    assert payload["passed"] is True
    assert payload["results"][0]["name"] == "exponent calculus"
    assert "wall_clock" not in payload


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_missing_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_norm_lhat_matches_l2(tmp_path, capsys):
    path = tmp_path / "g.gf"
    f = write_sample(path)
    code, out, _ = run(capsys, "norm", "kind=lhat,r=2.0", str(path),
                       "--no-timestamps")
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == pytest.approx(f.l2_norm(), rel=1e-10)
    assert payload["spec"].startswith("kind=lhat")


def test_norm_morrey_window_flag(tmp_path, capsys):
    path = tmp_path / "g.gf"
    write_sample(path)
    code_full, out_full, _ = run(
        capsys, "norm", "kind=morrey_hat,p=1.8,q=2.0,r=3.0", str(path),
        "--no-timestamps")
    code_part, out_part, _ = run(
        capsys, "norm", "kind=morrey_hat,p=1.8,q=2.0,r=3.0", str(path),
        "--window=-2:4", "--no-timestamps")
    assert code_full == 0 and code_part == 0
    assert json.loads(out_part)["value"] < json.loads(out_full)["value"]


def test_norm_ell_reports_minimizer(tmp_path, capsys):
    path = tmp_path / "g.gf"
    write_sample(path)
    code, out, _ = run(capsys, "norm", "kind=ell,p=1.8,sigma=3.0", str(path),
                       "--no-timestamps")
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] > 0
    assert "minimizer_xi" in payload


def test_norm_bad_file_exits_1(tmp_path, capsys):
    path = tmp_path / "junk.gf"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    code, out, err = run(capsys, "norm", "kind=lhat,r=2.0", str(path))
    assert code == 1
    assert "bad magic" in err


def test_norm_bad_spec_exits_1(tmp_path, capsys):
    path = tmp_path / "g.gf"
    write_sample(path)
    code, _, err = run(capsys, "norm", "kind=sobolev,r=2.0", str(path))
    assert code == 1
    assert "unknown norm kind" in err


def test_gf_info_and_convert(tmp_path, capsys):
    path = tmp_path / "g.gf"
    f = write_sample(path)
    code, out, _ = run(capsys, "gf", "info", str(path), "--no-timestamps")
    assert code == 0
    payload = json.loads(out)
    assert payload["format"] == "GF01"
    assert payload["n"] == 256
    assert payload["l2_norm"] == pytest.approx(f.l2_norm())

    fourier_path = tmp_path / "g_hat.gf"
    code, out, _ = run(capsys, "gf", "convert", str(path), str(fourier_path),
                       "--side", "fourier", "--no-timestamps")
    assert code == 0
    back = read_grid_function(fourier_path)
    assert back.side == FOURIER
    assert np.max(np.abs(back.values - f.to_fourier().values)) < 1e-12

    csv_path = tmp_path / "g.csv"
    code, out, _ = run(capsys, "gf", "convert", str(path), str(csv_path),
                       "--no-timestamps")
    assert code == 0
    header = csv_path.read_text().splitlines()[0]
    assert header == "x,re,im"


def test_gf_convert_requires_output(capsys):
    with pytest.raises(SystemExit) as info:
        main(["gf", "convert", "whatever.gf"])
    assert info.value.code == 2


def test_gf_convert_unknown_extension(tmp_path, capsys):
    path = tmp_path / "g.gf"
    write_sample(path)
    code, _, err = run(capsys, "gf", "convert", str(path),
                       str(tmp_path / "g.txt"))
    assert code == 2
    assert "unsupported output extension" in err


def test_solve_gkdv_gaussian(tmp_path, capsys):
    out_path = tmp_path / "run.stf"
    csv_path = tmp_path / "run.csv"
    code, out, _ = run(capsys, "solve", "gkdv", "--n", "256", "--t-end", "0.02",
                       "--dt", "1e-3", "--store-every", "10",
                       "--out", str(out_path), "--csv", str(csv_path),
                       "--no-timestamps")
    assert code == 0
    payload = json.loads(out)
    assert payload["equation"] == "gkdv"
    assert payload["mass_drift"] < 1e-8
    assert payload["frames"] >= 2
    assert out_path.exists() and csv_path.exists()
    assert csv_path.read_text().splitlines()[0] == "t,mass,sup"

    code, out, _ = run(capsys, "norm",
                       "kind=spacetime_X,r=1.8,s=0.0,preset=S",
                       str(out_path), "--no-timestamps")
    assert code == 0
    assert json.loads(out)["value"] > 0


def test_profiles_extract_round_trip(tmp_path, capsys):
    from dlab.deformations import Deformation, apply
    g = Grid(1024, 2 * np.pi * 16, -np.pi * 16)
    xi = g.frequencies()
    mask = (xi >= 0.0) & (xi < 1.0)
    psi = GridFunction(g, (np.exp(-((xi - 0.5) * 4.0) ** 2) * mask).astype(complex),
                       FOURIER)
    u = apply(Deformation(1, xi=3.0, s=0.02, y=0.5), psi, d_exponent=1.8)
    write_grid_function(u, tmp_path / "u0.gf")
    manifest = tmp_path / "inputs.json"
    manifest.write_text(json.dumps({"inputs": ["u0.gf"]}))
    out_dir = tmp_path / "out"
    code, out, _ = run(capsys, "profiles", "extract", str(manifest),
                       "--alpha", "1.8", "--sigma", "3.0",
                       "--t-scan", "0.1", "--out", str(out_dir),
                       "--no-timestamps")
    assert code == 0
    payload = json.loads(out)
    assert not payload["degenerate"]
    assert len(payload["deformations"]) == 1
    assert payload["deformations"][0].startswith("h=2")
    assert (out_dir / "psi.gf").exists()
    assert (out_dir / "residual_0.gf").exists()
