"""Command-line entry point: config parsing, figure reproduction, sweeps.

Figure commands pin the parameter sets quoted in the source figure captions
(lattice size, particle number, UN product, coupling and cutoff) and accept
--scale K=V overrides that shrink the boson number or grid density for
desk-scale runs while keeping UN fixed.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

import numpy as np

from .analysis import SweepSpec, sweep
from .bell import horodecki, optimize_bell
from .bogoliubov import reduced_state_bogoliubov
from .continuum import ContinuumConfig
from .exact import exact_reduced_state
from .model import ImpurityConfig, LatticeConfig, bogoliubov_modes, validate_config
from .states import ghz_state, plus_state

FIGURE_UN = 2.0  # interaction strength UN = 2J pinned for the lattice figures


class CliError(RuntimeError):
    pass


def load_config(path) -> tuple[LatticeConfig, ImpurityConfig, dict]:
    """Parse the key/value config file: [lattice], [impurities], optional [continuum]."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise CliError(f"config file not found: {path}")
    try:
        lat = parser["lattice"]
        lattice = LatticeConfig(
            M=lat.getint("M"),
            J=lat.getfloat("J", 1.0),
            U=lat.getfloat("U", 0.0),
            N=lat.getint("N"),
            a=lat.getfloat("a", 1.0),
            n0_override=lat.getfloat("n0_override") if "n0_override" in lat else None,
        )
        imp = parser["impurities"]
        sites = tuple(int(tok) for tok in imp.get("sites").replace(",", " ").split())
        impurities = ImpurityConfig(
            d=imp.getint("d", len(sites)),
            sites=sites,
            omega0=imp.getfloat("omega0", 1.0),
            eta=imp.getfloat("eta", 0.0),
        )
    except (KeyError, ValueError) as exc:
        raise CliError(f"bad config file {path}: {exc}") from exc
    extras = dict(parser["continuum"]) if parser.has_section("continuum") else {}
    return lattice, impurities, extras


def continuum_from_config(
    lattice: LatticeConfig, impurities: ImpurityConfig, extras: dict
) -> tuple[ContinuumConfig, tuple[int, int]]:
    if impurities.d != 2:
        raise CliError("the continuum solver describes exactly two impurities")
    q0 = float(extras.get("q0", 1.0 / lattice.M))
    cfg = ContinuumConfig(
        n0=lattice.n0,
        U=lattice.U,
        J=lattice.J,
        eta=impurities.eta,
        omega0=impurities.omega0,
        q0=q0,
        rel_tol=float(extras.get("rel_tol", 1e-10)),
    )
    return cfg, (impurities.sites[0], impurities.sites[1])


def _parse_range(text: str) -> tuple[float, ...]:
    """'lo:hi:n' -> n evenly spaced values; 'a,b,c' -> explicit values."""
    if ":" in text:
        lo, hi, n = text.split(":")
        return tuple(np.linspace(float(lo), float(hi), int(n)))
    return tuple(float(tok) for tok in text.split(","))


def _parse_scale(pairs) -> dict:
    scale: dict = {}
    for pair in pairs or []:
        key, _, value = pair.partition("=")
        if not value:
            raise CliError(f"--scale expects K=V, got {pair!r}")
        scale[key] = value
    return scale


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _grid(scale: dict, key_points: str, key_max: str, default_points: int, default_max: float,
          start: float = 0.0) -> tuple[float, ...]:
    points = int(scale.get(key_points, default_points))
    stop = float(scale.get(key_max, default_max))
    return tuple(np.linspace(start, stop, points))


def _summary_line(name: str, result) -> str:
    def best(attr):
        values = [getattr(c, attr) for c in result.cells if getattr(c, attr) is not None]
        return values

    parts = [name]
    for attr, label, agg in (
        ("wwzb", "wwzb max", max),
        ("gtnl", "gtnl max", max),
        ("horodecki_B", "B max", max),
        ("pstar", "p* min", min),
        ("blp", "blp final", lambda v: v[-1]),
    ):
        values = best(attr)
        if values:
            parts.append(f"{label} {format(agg(values), '.6g')}")
    ok = sum(1 for c in result.cells if c.error is None)
    parts.append(f"cells {ok}/{len(result.cells)} ok")
    return "; ".join(parts)


def _write_and_report(result, out: Path, stem: str, failures: list) -> None:
    result.to_csv(out / f"{stem}.csv")
    result.to_json(out / f"{stem}.json")
    print(_summary_line(stem, result))
    failures.extend(c for c in result.cells if c.error is not None)


def _initial(name: str, d: int) -> np.ndarray:
    if name == "ghz":
        return ghz_state(d)
    return plus_state(d)


def cmd_spectrum(args) -> int:
    lattice, impurities, _ = load_config(args.config)
    model = validate_config(lattice, impurities)
    out = _outdir(args)
    path = out / "spectrum.csv"
    lines = ["m,k,epsilon,omega,xi,nu"]
    for mode in bogoliubov_modes(model):
        lines.append(
            ",".join(
                format(v, ".12g")
                for v in (mode.m, mode.k, mode.epsilon, mode.omega, mode.xi, mode.nu)
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"spectrum: {model.lattice.M - 1} modes; omega range "
          f"[{min(m.omega for m in bogoliubov_modes(model)):.6g}, "
          f"{max(m.omega for m in bogoliubov_modes(model)):.6g}]; wrote {path}")
    return 0


def cmd_evolve(args) -> int:
    lattice, impurities, _ = load_config(args.config)
    model = validate_config(lattice, impurities)
    rho0 = _initial(args.initial, model.impurities.d)
    solver = args.solver or "exact"
    if solver == "exact":
        rho_t = exact_reduced_state(model, rho0, args.t)
    elif solver == "bogoliubov":
        rho_t = reduced_state_bogoliubov(rho0, args.t, model, unitary_only=args.unitary_only)
    else:
        raise CliError("evolve supports the exact and bogoliubov solvers")
    out = _outdir(args)
    path = out / "state.json"
    payload = {
        "solver": solver,
        "t": args.t,
        "initial": args.initial,
        "state": {"re": rho_t.real.tolist(), "im": rho_t.imag.tolist()},
    }
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    off_diag = np.abs(rho_t - np.diag(np.diag(rho_t)))
    print(f"evolve: t={args.t:g} solver={solver}; max coherence "
          f"{off_diag.max():.6g}; wrote {path}")
    return 0


def cmd_bell(args) -> int:
    lattice, impurities, _ = load_config(args.config)
    model = validate_config(lattice, impurities)
    d = model.impurities.d
    rho0 = _initial(args.initial, d)
    solver = args.solver or "exact"
    if solver == "exact":
        rho_t = exact_reduced_state(model, rho0, args.t)
    elif solver == "bogoliubov":
        rho_t = reduced_state_bogoliubov(rho0, args.t, model, unitary_only=args.unitary_only)
    else:
        raise CliError("bell supports the exact and bogoliubov solvers")
    rng = np.random.default_rng(args.seed)
    report: dict = {"solver": solver, "t": args.t, "seed": args.seed}
    best = optimize_bell(rho_t, "wwzb", restarts=args.restarts, rng=rng)
    report["wwzb"] = best.value
    report["pstar_wwzb"] = 1.0 / best.value if best.value > 1.0 + 1e-9 else None
    if d == 3:
        report["gtnl"] = optimize_bell(rho_t, "gtnl", restarts=args.restarts, rng=rng).value
    if d == 2:
        m_value, b_value = horodecki(rho_t)
        report["horodecki_M"] = m_value
        report["horodecki_B"] = b_value
    out = _outdir(args)
    path = out / "bell.json"
    path.write_text(json.dumps(report, indent=2), encoding="utf-8")
    pieces = [f"{k} {format(v, '.6g')}" for k, v in report.items()
              if isinstance(v, float)]
    print("bell: " + "; ".join(pieces) + f"; wrote {path}")
    return 0


def cmd_sweep(args) -> int:
    lattice, impurities, extras = load_config(args.config)
    solver = args.solver or "exact"
    etas = _parse_range(args.eta_range) if args.eta_range else (impurities.eta,)
    ts = _parse_range(args.t_range)
    kwargs: dict = {}
    if solver == "continuum":
        cfg, sites = continuum_from_config(lattice, impurities, extras)
        kwargs.update(continuum_cfg=cfg, continuum_sites=sites)
    else:
        kwargs.update(lattice=lattice, impurities=impurities)
    spec = SweepSpec(
        solver=solver,
        eta_values=tuple(etas),
        t_values=tuple(ts),
        initial_state=args.initial,
        unitary_only=args.unitary_only,
        seed=args.seed,
        restarts=args.restarts,
        **kwargs,
    )
    result = sweep(spec)
    failures: list = []
    _write_and_report(result, _outdir(args), "sweep", failures)
    return _exit_code(failures)


def _exit_code(failures: list) -> int:
    if failures:
        print(
            json.dumps(
                {
                    "error": {
                        "type": "CellFailures",
                        "count": len(failures),
                        "first": failures[0].error,
                    }
                }
            ),
            file=sys.stderr,
        )
        return 2
    return 0


def cmd_figure1(args) -> int:
    scale = _parse_scale(args.scale)
    n_bosons = int(scale.get("N", 100))
    lattice = LatticeConfig(M=3, J=1.0, U=FIGURE_UN / n_bosons, N=n_bosons)
    impurities = ImpurityConfig(d=3, sites=(1, 2, 3), omega0=1.0, eta=0.0)
    ts = _grid(scale, "t_points", "t_max", 61, 12.0)
    etas = _grid(scale, "eta_points", "eta_max", 11, 0.5)
    restarts = int(scale.get("restarts", args.restarts))
    out = _outdir(args)
    failures: list = []
    for witness in ("wwzb", "gtnl"):
        spec = SweepSpec(
            solver=args.solver or "exact",
            eta_values=etas,
            t_values=ts,
            lattice=lattice,
            impurities=impurities,
            witnesses=(witness,),
            pstar_witness=witness,
            unitary_only=args.unitary_only,
            seed=args.seed,
            restarts=restarts,
        )
        _write_and_report(sweep(spec), out, f"figure1_{witness}", failures)
    return _exit_code(failures)


def cmd_figure2(args) -> int:
    scale = _parse_scale(args.scale)
    n_bosons = int(scale.get("N", 1000))
    lattice = LatticeConfig(M=5, J=1.0, U=FIGURE_UN / n_bosons, N=n_bosons)
    impurities = ImpurityConfig(d=5, sites=(1, 2, 3, 4, 5), omega0=1.0, eta=0.05)
    ts = _grid(scale, "t_points", "t_max", 161, 20.0)
    spec = SweepSpec(
        solver=args.solver or "bogoliubov",
        eta_values=(impurities.eta,),
        t_values=ts,
        lattice=lattice,
        impurities=impurities,
        seed=args.seed,
        restarts=int(scale.get("restarts", args.restarts)),
    )
    failures: list = []
    _write_and_report(sweep(spec), _outdir(args), "figure2", failures)
    return _exit_code(failures)


def cmd_figure3(args) -> int:
    scale = _parse_scale(args.scale)
    n_bosons = int(scale.get("N", 1000))
    m_min = int(scale.get("M_min", 2))
    m_max = int(scale.get("M_max", 10))
    ts = _grid(scale, "t_points", "t_max", 101, 10.0)
    out = _outdir(args)
    failures: list = []
    for m_sites in range(m_min, m_max + 1):
        lattice = LatticeConfig(M=m_sites, J=1.0, U=FIGURE_UN / n_bosons, N=n_bosons)
        sites = (1, 1) if m_sites == 1 else (1, m_sites)
        impurities = ImpurityConfig(d=2, sites=sites, omega0=1.0, eta=0.04)
        spec = SweepSpec(
            solver="bogoliubov",
            eta_values=(impurities.eta,),
            t_values=ts,
            lattice=lattice,
            impurities=impurities,
            unitary_only=True,  # nonlocality panel neglects the non-unitary part
            seed=args.seed,
            restarts=int(scale.get("restarts", args.restarts)),
        )
        _write_and_report(sweep(spec), out, f"figure3_M{m_sites}", failures)
    return _exit_code(failures)


def _figure45_config(scale: dict) -> tuple[ContinuumConfig, tuple[int, int]]:
    cfg = ContinuumConfig(
        n0=float(scale.get("n0", 1.0)),
        U=float(scale.get("U", 0.04)),
        J=1.0,
        eta=float(scale.get("eta", 0.03)),
        omega0=1.0,
        q0=float(scale.get("q0", 1e-6)),
    )
    return cfg, (1, 2)


def cmd_figure4(args) -> int:
    scale = _parse_scale(args.scale)
    cfg, sites = _figure45_config(scale)
    ts = _grid(scale, "t_points", "t_max", 201, 1000.0)
    spec = SweepSpec(
        solver="continuum",
        eta_values=(cfg.eta,),
        t_values=ts,
        continuum_cfg=cfg,
        continuum_sites=sites,
        seed=args.seed,
    )
    failures: list = []
    _write_and_report(sweep(spec), _outdir(args), "figure4", failures)
    return _exit_code(failures)


def cmd_figure5(args) -> int:
    scale = _parse_scale(args.scale)
    cfg, sites = _figure45_config(scale)
    ts = _grid(scale, "t_points", "t_max", 241, 1200.0)
    spec = SweepSpec(
        solver="continuum",
        eta_values=(cfg.eta,),
        t_values=ts,
        continuum_cfg=cfg,
        continuum_sites=sites,
        seed=args.seed,
    )
    failures: list = []
    _write_and_report(sweep(spec), _outdir(args), "figure5", failures)
    return _exit_code(failures)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coldbell",
        description="Impurity qubits in a Bose-Hubbard ring: dynamics, nonlocality, sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config: bool):
        if needs_config:
            p.add_argument("--config", required=True, help="INI config file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--solver", choices=("exact", "bogoliubov", "continuum"), default=None)
        p.add_argument("--unitary-only", action="store_true",
                       help="drop the dephasing part, keep the phases")
        p.add_argument("--restarts", type=int, default=32,
                       help="optimizer restarts per witness evaluation")
        p.add_argument("--initial", choices=("plus", "ghz"), default="plus")

    p = sub.add_parser("spectrum", help="write the quasiparticle spectrum")
    common(p, True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("evolve", help="reduced qubit state at one time")
    common(p, True)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("bell", help="witness values for the evolved state")
    common(p, True)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("sweep", help="witness grid over (eta, t)")
    common(p, True)
    p.add_argument("--eta-range", help="lo:hi:n or comma list (default: config eta)")
    p.add_argument("--t-range", required=True, help="lo:hi:n or comma list")
    p.set_defaults(func=cmd_sweep)

    for name, func in (
        ("figure1", cmd_figure1),
        ("figure2", cmd_figure2),
        ("figure3", cmd_figure3),
        ("figure4", cmd_figure4),
        ("figure5", cmd_figure5),
    ):
        p = sub.add_parser(name, help=f"reproduce the {name} data set")
        common(p, False)
        p.add_argument("--scale", action="append", metavar="K=V",
                       help="desk-scale override, e.g. N=20 or t_points=40")
        p.set_defaults(func=func)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
