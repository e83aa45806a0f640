import json

import numpy as np
import pytest

from coldbell.cli import main
from coldbell.analysis import load_sweep_csv
from coldbell.states import plus_state

CONFIG = """
[lattice]
M = 3
J = 1.0
U = 0.1
N = 20

[impurities]
d = 3
sites = 1, 2, 3
omega0 = 1.0
eta = 0.2
"""

CONFIG_2Q = """
[lattice]
M = 200
J = 1.0
U = 0.04
N = 200

[impurities]
d = 2
sites = 1, 2
omega0 = 1.0
eta = 0.03

[continuum]
q0 = 1e-4
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "ring.ini"
    path.write_text(CONFIG)
    return path


def test_spectrum_command(config_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["spectrum", "--config", str(config_file), "--out", str(out)]) == 0
    lines = (out / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "m,k,epsilon,omega,xi,nu"
    assert len(lines) == 3  # M - 1 modes
    first = [float(x) for x in lines[1].split(",")]
    assert first[2] == pytest.approx(3.0)  # epsilon at k = 2 pi / 3


def test_evolve_zero_time_returns_input(config_file, tmp_path):
    out = tmp_path / "out"
    assert main(["evolve", "--config", str(config_file), "--t", "0", "--out", str(out)]) == 0
    payload = json.loads((out / "state.json").read_text())
    state = np.array(payload["state"]["re"]) + 1j * np.array(payload["state"]["im"])
    assert np.allclose(state, plus_state(3), atol=1e-12)


def test_evolve_solvers_agree_weak_coupling(config_file, tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    main(["evolve", "--config", str(config_file), "--t", "1.0", "--out", str(out_a),
          "--solver", "exact"])
    main(["evolve", "--config", str(config_file), "--t", "1.0", "--out", str(out_b),
          "--solver", "bogoliubov"])
    load = lambda p: json.loads((p / "state.json").read_text())["state"]
    a = np.array(load(out_a)["re"]) + 1j * np.array(load(out_a)["im"])
    b = np.array(load(out_b)["re"]) + 1j * np.array(load(out_b)["im"])
    assert np.max(np.abs(a - b)) < 0.05


def test_bell_command(config_file, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["bell", "--config", str(config_file), "--t", "1.5", "--out", str(out),
                 "--restarts", "6", "--seed", "3"])
    assert code == 0
    payload = json.loads((out / "bell.json").read_text())
    assert "wwzb" in payload and "gtnl" in payload
    assert capsys.readouterr().out.startswith("bell:")


def test_sweep_command_roundtrip(config_file, tmp_path):
    out = tmp_path / "out"
    code = main([
        "sweep", "--config", str(config_file), "--out", str(out),
        "--t-range", "0.5:1.5:3", "--eta-range", "0.1,0.3",
        "--solver", "bogoliubov", "--restarts", "4", "--seed", "5",
    ])
    assert code == 0
    meta, rows = load_sweep_csv(out / "sweep.csv")
    assert meta["solver"] == "bogoliubov"
    assert len(rows) == 6
    assert all(row["wwzb"] is not None for row in rows)


def test_missing_config_gives_error_json(tmp_path, capsys):
    code = main(["spectrum", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)])
    assert code == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "CliError"


def test_figure4_defaults_and_schema(tmp_path):
    out = tmp_path / "fig4"
    code = main(["figure4", "--out", str(out), "--scale", "t_points=5",
                 "--scale", "t_max=50", "--scale", "q0=1e-4"])
    assert code == 0
    payload = json.loads((out / "figure4.json").read_text())
    cfg = payload["spec"]["continuum_cfg"]
    assert cfg["n0"] == 1.0
    assert cfg["U"] == pytest.approx(0.04)
    assert cfg["eta"] == pytest.approx(0.03)
    assert cfg["omega0"] == 1.0
    meta, rows = load_sweep_csv(out / "figure4.csv")
    assert [r["gamma_plus"] is not None for r in rows].count(True) == len(rows)
    # default cutoff comes from the caption when not scaled
    code = main(["figure5", "--out", str(out), "--scale", "t_points=3",
                 "--scale", "t_max=30", "--scale", "q0=1e-4"])
    assert code == 0
    payload5 = json.loads((out / "figure5.json").read_text())
    assert payload5["spec"]["continuum_cfg"]["q0"] == pytest.approx(1e-4)


def test_figure1_scaled_smoke(tmp_path):
    out = tmp_path / "fig1"
    code = main([
        "figure1", "--out", str(out), "--seed", "2",
        "--scale", "N=4", "--scale", "t_points=3", "--scale", "t_max=2",
        "--scale", "eta_points=2", "--scale", "restarts=2",
    ])
    assert code == 0
    meta, rows = load_sweep_csv(out / "figure1_wwzb.csv")
    assert meta["revival_omega"]  # M=3 revival marker present
    assert len(rows) == 6
    meta_g, rows_g = load_sweep_csv(out / "figure1_gtnl.csv")
    assert all(row["gtnl"] is not None for row in rows_g)


def test_continuum_sweep_from_config(tmp_path):
    path = tmp_path / "cont.ini"
    path.write_text(CONFIG_2Q)
    out = tmp_path / "out"
    code = main([
        "sweep", "--config", str(path), "--out", str(out),
        "--t-range", "2:10:3", "--solver", "continuum", "--seed", "1",
    ])
    assert code == 0
    meta, rows = load_sweep_csv(out / "sweep.csv")
    assert all(row["gamma0"] is not None for row in rows)
