"""Secondary acceptance: render a desk-scale CSV from every figure command of
the simulation CLI without error, with revival markers on the M=3 heatmap and
byte-identical output on re-render."""

import hashlib

import numpy as np
import pytest

coldbell_cli = pytest.importorskip("coldbell.cli", reason="simulation package not installed")

from coldbell_plots import PlotSpec, build_figure, render


@pytest.fixture(scope="module")
def figure_csvs(tmp_path_factory):
    out = tmp_path_factory.mktemp("figures")
    commands = [
        ["figure1", "--out", str(out), "--seed", "1",
         "--scale", "N=4", "--scale", "t_points=4", "--scale", "t_max=4",
         "--scale", "eta_points=3", "--scale", "restarts=2"],
        ["figure2", "--out", str(out), "--seed", "1",
         "--scale", "t_points=4", "--scale", "t_max=8", "--scale", "restarts=2"],
        ["figure3", "--out", str(out), "--seed", "1",
         "--scale", "M_min=2", "--scale", "M_max=3",
         "--scale", "t_points=4", "--scale", "t_max=4", "--scale", "restarts=2"],
        ["figure4", "--out", str(out), "--seed", "1",
         "--scale", "t_points=5", "--scale", "t_max=200", "--scale", "q0=1e-5"],
        ["figure5", "--out", str(out), "--seed", "1",
         "--scale", "t_points=5", "--scale", "t_max=600", "--scale", "q0=1e-5"],
    ]
    for argv in commands:
        assert coldbell_cli.main(argv) == 0, f"figure command failed: {argv[0]}"
    return out


def test_plot_pipeline(figure_csvs, tmp_path):
    jobs = [
        ("figure1_wwzb.csv", PlotSpec, dict(kind="heatmap", value="wwzb")),
        ("figure1_gtnl.csv", PlotSpec, dict(kind="heatmap", value="gtnl")),
        ("figure2.csv", PlotSpec, dict(kind="lines", columns=("pstar", "blp"))),
        ("figure3_M2.csv", PlotSpec, dict(kind="lines", columns=("pstar",))),
        ("figure3_M3.csv", PlotSpec, dict(kind="lines", columns=("blp",))),
        ("figure4.csv", PlotSpec, dict(kind="lines", columns=("gamma_plus", "gamma_minus"),
                                       panels=True)),
        ("figure5.csv", PlotSpec, dict(kind="lines", columns=("horodecki_B",))),
    ]
    rendered = []
    for csv_name, spec_cls, kwargs in jobs:
        source = figure_csvs / csv_name
        assert source.exists(), f"missing {csv_name}"
        out = tmp_path / (csv_name.replace(".csv", ".png"))
        spec = spec_cls(input=str(source), out=str(out), **kwargs)
        path = render(spec)
        assert path.exists() and path.stat().st_size > 0
        rendered.append((spec, path))
        print(f"PASS  render {csv_name} -> {path.name}")

    # dashed revival markers on the M=3 heatmap
    spec = PlotSpec(input=str(figure_csvs / "figure1_wwzb.csv"), kind="heatmap",
                    value="wwzb", out=str(tmp_path / "marker_check.png"))
    _, axes = build_figure(spec)
    dashed = [ln for ln in axes[0].lines if ln.get_linestyle() == "--"]
    assert dashed, "no revival markers drawn on the M=3 heatmap"
    assert dashed[0].get_xdata()[0] == pytest.approx(2 * np.pi / np.sqrt(13.0), rel=1e-9)
    print(f"PASS  revival markers at {[round(ln.get_xdata()[0], 3) for ln in dashed]}")

    # idempotent re-render
    for spec, path in rendered[:3]:
        first = hashlib.sha256(path.read_bytes()).hexdigest()
        second = hashlib.sha256(render(spec).read_bytes()).hexdigest()
        assert first == second
    print("PASS  idempotent re-render")
