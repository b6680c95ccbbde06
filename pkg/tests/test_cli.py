import numpy as np
import pytest

from relaxfv import cli


def test_run_material_interface_writes_series(tmp_path, capsys):
    code = cli.main(["run", "--case", "material_interface", "--scheme", "hll",
                     "--n", "50", "--t-end", "0.05", "--out", str(tmp_path),
                     "--output-times", "0.02"])
    assert code == 0
    final = tmp_path / "material_interface_hll_n50_final.csv"
    mid = tmp_path / "material_interface_hll_n50_t0.020000.csv"
    assert final.exists() and mid.exists()
    header = final.read_text().splitlines()[0]
    assert header.startswith("x,rho,u,p,T,gamma_mix")
    out = capsys.readouterr().out
    assert "audits" in out


def test_run_rejects_unknown_scheme(tmp_path):
    with pytest.raises(SystemExit):
        cli.main(["run", "--case", "material_interface", "--scheme", "roe",
                  "--out", str(tmp_path)])


def test_scheme_alias_relax():
    assert cli.parse_scheme("relax").kind == "pressure_relax"
    assert cli.parse_scheme("godunov").kind == "godunov"


def test_convergence_material_interface(tmp_path, capsys):
    code = cli.main(["convergence", "--case", "material_interface",
                     "--schemes", "hll", "--resolutions", "25,50",
                     "--out", str(tmp_path)])
    assert code == 0
    table = tmp_path / "convergence_material_interface.csv"
    assert table.exists()
    lines = table.read_text().splitlines()
    assert lines[0] == "scheme,n,l1_rho,linf_u,linf_p"
    assert len(lines) == 3
    assert "observed order" in capsys.readouterr().out


def test_verify_subcommand(tmp_path, capsys):
    code = cli.main(["verify", "--suite", "variational", "--trials", "5",
                     "--seed", "1", "--out", str(tmp_path / "report.csv")])
    assert code == 0
    assert (tmp_path / "report.csv").exists()
    assert "[pass]" in capsys.readouterr().out


def test_verify_all_small(capsys):
    code = cli.main(["verify", "--suite", "all", "--trials", "8",
                     "--species", "N2,He"])
    assert code == 0
    out = capsys.readouterr().out
    for name in ("eta_congruence", "zeta_convexity", "variational",
                 "h_theorem"):
        assert name in out


def test_mesh_generate_and_convert(tmp_path, capsys):
    native = tmp_path / "m.txt"
    vtk = tmp_path / "m.vtk"
    code = cli.main(["mesh", "--generate", "cylinder",
                     "--params", "n_radial=4,n_theta=5,body_radius=1.0",
                     "--out", str(native), "--vtk", str(vtk)])
    assert code == 0
    assert native.exists() and vtk.exists()
    code = cli.main(["mesh", "--input", str(native)])
    assert code == 0
    assert "20 cells" in capsys.readouterr().out


def test_config_file_defaults(tmp_path):
    cfgfile = tmp_path / "run.toml"
    cfgfile.write_text('[run]\nn = 25\nt-end = 0.02\n')
    code = cli.main(["--config", str(cfgfile), "run", "--case",
                     "material_interface", "--scheme", "relax",
                     "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "material_interface_pressure_relax_n25_final.csv").exists()


def test_run_2d_small_sphere(tmp_path, capsys):
    code = cli.main(["run", "--case", "sphere", "--scheme", "hll", "--n", "8",
                     "--target-drop", "50", "--max-iter", "2000",
                     "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "sphere_hll_n8.vtk").exists()
    log = tmp_path / "sphere_hll_n8_residuals.csv"
    assert log.exists()
    assert log.read_text().startswith("iteration,residual_drop")
    assert "shock standoff" in capsys.readouterr().out


def test_determinism(tmp_path):
    outs = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        cli.main(["run", "--case", "material_interface", "--scheme",
                  "godunov", "--n", "40", "--t-end", "0.03", "--out", str(d)])
        outs.append((d / "material_interface_godunov_n40_final.csv").read_bytes())
    assert outs[0] == outs[1]
