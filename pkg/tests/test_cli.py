import math

import pytest

from fdd2d.cli import CSV_COLUMNS, build_presets, main

HEADER = ",".join(CSV_COLUMNS)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_custom_analytic_sweep(tmp_path, capsys):
    code, out, _ = run([
        "sweep", "--sweep", "custom", "--var", "theta", "--values=-5,0,5",
        "--scenarios", "FD", "--out", str(tmp_path), "--no-plot",
    ], capsys)
    assert code == 0
    path = tmp_path / "sweep_custom.csv"
    assert str(path) in out
    lines = path.read_text().splitlines()
    assert lines[0] == HEADER
    # 3 values x 3 FD modes, analytic only
    assert len(lines) == 1 + 9
    row0 = lines[1].split(",")
    assert row0[0] == "theta" and row0[1] == "-5" and row0[2] == "FD"
    # theta = 0 dB row for the cellular mode carries the frozen outage
    mid = [l for l in lines if l.startswith("theta,0,FD,c,")][0].split(",")
    # values are rendered with 10 significant digits
    assert float(mid[5]) == pytest.approx(1.0 - 0.3573339295842012, rel=1e-9)
    assert float(mid[6]) == pytest.approx(0.6064726472577564, rel=1e-9)
    assert mid[11] == ""  # analytic rows have no standard error


def test_rows_sorted_and_stable(tmp_path, capsys):
    code, _, _ = run([
        "sweep", "--sweep", "custom", "--var", "t_d", "--values", "0.1,1",
        "--out", str(tmp_path), "--no-plot",
    ], capsys)
    assert code == 0
    lines = (tmp_path / "sweep_custom.csv").read_text().splitlines()[1:]
    keys = [tuple(l.split(",")[1:5]) for l in lines]
    scen = {"FD": 0, "HD": 1, "Traditional": 2}
    mode = {"c": 0, "d": 1, "e": 2}
    decoded = [(float(v), scen[s], mode[m], e) for v, s, m, e in keys]
    assert decoded == sorted(decoded)


def test_bits_column(tmp_path, capsys):
    code, _, _ = run([
        "sweep", "--sweep", "custom", "--var", "theta", "--values", "1",
        "--scenarios", "FD", "--out", str(tmp_path), "--no-plot", "--bits",
    ], capsys)
    assert code == 0
    lines = (tmp_path / "sweep_custom.csv").read_text().splitlines()
    assert lines[0] == HEADER + ",rate_bits"
    for line in lines[1:]:
        cells = line.split(",")
        assert float(cells[12]) == pytest.approx(float(cells[6]) / math.log(2.0), rel=1e-9)


def test_simulate_engine_deterministic(tmp_path, capsys):
    argv = [
        "sweep", "--sweep", "custom", "--var", "theta", "--values", "1",
        "--scenarios", "FD", "--engine", "both", "--seed", "3",
        "--realizations", "6", "--probes", "16", "--area-km2", "25",
        "--out", None, "--no-plot",
    ]
    argv_a = argv.copy()
    argv_a[argv.index(None)] = str(tmp_path / "a")
    argv_b = argv.copy()
    argv_b[argv.index(None)] = str(tmp_path / "b")
    assert run(argv_a, capsys)[0] == 0
    assert run(argv_b, capsys)[0] == 0
    a = (tmp_path / "a" / "sweep_custom.csv").read_bytes()
    b = (tmp_path / "b" / "sweep_custom.csv").read_bytes()
    assert a == b
    lines = a.decode().splitlines()[1:]
    engines = {l.split(",")[4] for l in lines}
    assert engines == {"analytic", "simulate"}
    sim_c = [l for l in lines if l.split(",")[3:5] == ["c", "simulate"]][0].split(",")
    assert sim_c[11] != ""  # simulated rows carry a standard error
    assert 0.0 <= float(sim_c[5]) <= 1.0


def test_plot_rendered_next_to_csv(tmp_path, capsys):
    code, out, _ = run([
        "sweep", "--sweep", "custom", "--var", "theta", "--values", "0.5,1,2",
        "--scenarios", "FD", "--out", str(tmp_path),
    ], capsys)
    assert code == 0
    png = tmp_path / "sweep_custom.png"
    assert png.exists() and png.stat().st_size > 0
    assert str(png) in out


def test_preset_catalog_and_filenames(tmp_path, capsys):
    presets = build_presets()
    for name in ("fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10",
                 "fig11", "fig12", "fig13"):
        assert name in presets
    names = [s.filename() for s in presets["fig4"]]
    assert names == ["sweep_fig4_r2_0.5.csv", "sweep_fig4_r2_2.csv"]
    code, out, _ = run([
        "sweep", "--sweep", "fig6", "--out", str(tmp_path), "--no-plot",
    ], capsys)
    assert code == 0
    lines = (tmp_path / "sweep_fig6.csv").read_text().splitlines()[1:]
    assert {l.split(",")[2] for l in lines} == {"FD", "HD", "Traditional"}


def test_unknown_sweep_name(tmp_path, capsys):
    code, _, err = run(["sweep", "--sweep", "fig99", "--out", str(tmp_path)], capsys)
    assert code == 1
    assert "unknown sweep" in err


def test_custom_requires_var_and_values(tmp_path, capsys):
    code, _, err = run(["sweep", "--sweep", "custom", "--out", str(tmp_path)], capsys)
    assert code == 1
    assert "--var" in err


def test_values_must_increase(tmp_path, capsys):
    code, _, err = run([
        "sweep", "--sweep", "custom", "--var", "theta", "--values", "5,1",
        "--out", str(tmp_path),
    ], capsys)
    assert code == 1
    assert "increas" in err


def test_unknown_scenario(tmp_path, capsys):
    code, _, err = run([
        "sweep", "--sweep", "custom", "--var", "theta", "--values", "1",
        "--scenarios", "XX", "--out", str(tmp_path),
    ], capsys)
    assert code == 1
    assert "unknown scenario" in err


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "net.cfg"
    cfg.write_text("lambda_bs_per_km2 = 10\nnot_a_key = 1\n")
    code, _, err = run([
        "sweep", "--config", str(cfg), "--sweep", "custom", "--var", "theta",
        "--values", "1", "--out", str(tmp_path),
    ], capsys)
    assert code == 1
    assert "not_a_key" in err


def test_config_file_feeds_engine(tmp_path, capsys):
    cfg = tmp_path / "net.cfg"
    cfg.write_text("t_d = 0.5\n")
    code, _, _ = run([
        "sweep", "--config", str(cfg), "--sweep", "custom", "--var", "theta",
        "--values", "1", "--scenarios", "FD", "--out", str(tmp_path), "--no-plot",
    ], capsys)
    assert code == 0
    row = [l for l in (tmp_path / "sweep_custom.csv").read_text().splitlines()
           if l.startswith("theta,1,FD,c,")][0].split(",")
    # default-config frozen outage must not appear with t_d overridden
    assert float(row[5]) != pytest.approx(1.0 - 0.3573339295842012, rel=1e-9)


def test_validate_smoke_reports_honest_failure(capsys):
    code, out, _ = run([
        "validate", "--seed", "0", "--realizations", "60",
        "--probes", "32", "--area-km2", "100",
    ], capsys)
    assert code == 1
    assert "4/5 checks passed" in out
    failing = [l for l in out.splitlines() if l.startswith("FAIL")]
    assert len(failing) == 1
    assert "re_distance_model_ks" in failing[0]
    for name in ("closed_forms_vs_quadrature", "arctan_identity",
                 "outage_analytic_vs_sim", "degenerate_limits"):
        assert any(l.startswith("PASS " + name) for l in out.splitlines())
