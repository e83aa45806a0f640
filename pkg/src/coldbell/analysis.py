"""Noise robustness, information backflow and reproducible parameter sweeps.

The sweep runner evaluates witnesses over an (eta, t) grid with one of three
solvers (exact, bogoliubov, continuum), fans deterministic RNG streams out of
a master seed, and serialises results to a fixed-schema CSV plus JSON.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import bell
from .bogoliubov import gamma_finite, gamma_matrix, reduced_state_bogoliubov
from .continuum import (
    ContinuumConfig,
    gamma0,
    gamma_pm,
    reduced_state_two_impurity_continuum,
)
from .exact import DEFAULT_MAX_STATES, exact_reduced_states
from .model import ImpurityConfig, LatticeConfig, Model, mode_arrays, validate_config
from .states import ghz_state, maximally_mixed, plus_state

__all__ = [
    "depolarize",
    "pstar",
    "BlpResult",
    "blp_measure",
    "RateSignReport",
    "dephasing_rate_sign",
    "SweepSpec",
    "CellResult",
    "SweepResult",
    "sweep",
    "write_csv",
    "write_json",
    "load_sweep_csv",
    "worker_count",
]

CSV_SCHEMA = 1
CSV_COLUMNS = (
    "solver",
    "eta",
    "t",
    "wwzb",
    "gtnl",
    "horodecki_B",
    "pstar",
    "blp",
    "gamma0",
    "gamma_plus",
    "gamma_minus",
)

SOLVERS = ("exact", "bogoliubov", "continuum")


def depolarize(rho: np.ndarray, p: float) -> np.ndarray:
    """Completely depolarising noise p * rho + (1 - p) * I / 2^d."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise weight must lie in [0, 1], got {p}")
    rho = np.asarray(rho, dtype=complex)
    n = rho.shape[0]
    return p * rho + (1.0 - p) * np.eye(n) / n


def pstar(
    rho: np.ndarray,
    inequality: str = "wwzb",
    *,
    seed: int = 0,
    rng: np.random.Generator | None = None,
    restarts: int = 32,
    tol: float = 1e-3,
    method: str = "auto",
    x0_hint: np.ndarray | None = None,
) -> float | None:
    """Smallest depolarising weight at which the state stays nonlocal.

    WWZB correlators of traceless observables scale linearly in p, so
    p* = 1 / V_opt; the Horodecki M scales as p^2, so p* = 1 / sqrt(M).  The
    GTNL case bisects on p with an inner optimization (the optimum is a max of
    affine functions of p, hence convex, and negative at p = 0).  Returns None
    when the state is not nonlocal at p = 1.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    if method not in ("auto", "bisection"):
        raise ValueError(f"unknown method {method!r}")

    if inequality == "horodecki":
        m_value, _ = bell.horodecki(rho)
        if m_value <= 1.0:
            return None
        if method == "auto":
            return 1.0 / np.sqrt(m_value)
        return _pstar_bisection(
            rho, "horodecki", rng=rng, restarts=restarts, tol=tol, x0_hint=x0_hint
        )

    if inequality == "wwzb":
        best = bell.optimize_bell(rho, "wwzb", restarts=restarts, rng=rng, x0_hint=x0_hint)
        if best.value <= bell.WWZB_THRESHOLD:
            return None
        if method == "auto":
            return 1.0 / best.value
        return _pstar_bisection(
            rho, "wwzb", rng=rng, restarts=restarts, tol=tol, x0_hint=best.angles
        )

    if inequality == "gtnl":
        return _pstar_bisection(rho, "gtnl", rng=rng, restarts=restarts, tol=tol, x0_hint=x0_hint)

    raise ValueError(f"unknown inequality {inequality!r}")


def _witness_margin(rho, inequality, rng, restarts, x0_hint):
    """Optimised witness value minus its local bound, plus the argmax angles."""
    if inequality == "horodecki":
        m_value, _ = bell.horodecki(rho)
        return m_value - 1.0, None
    best = bell.optimize_bell(rho, inequality, restarts=restarts, rng=rng, x0_hint=x0_hint)
    bound = 1.0 if inequality == "wwzb" else 0.0
    return best.value - bound, best.angles


def _pstar_bisection(rho, inequality, *, rng, restarts, tol, x0_hint, max_iter: int = 40):
    margin, hint = _witness_margin(rho, inequality, rng, restarts, x0_hint)
    if margin <= 1e-9:
        return None
    lo, hi = 0.01, 1.0
    margin_lo, _ = _witness_margin(depolarize(rho, lo), inequality, rng, restarts, hint)
    if margin_lo > 0.0:
        return lo
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        margin_mid, hint = _witness_margin(depolarize(rho, mid), inequality, rng, restarts, hint)
        if margin_mid > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BlpResult:
    """Cumulative information backflow: the running BLP sum per basis pair and
    the pairwise maximum, both aligned with the time grid."""

    times: np.ndarray
    total: np.ndarray
    per_pair: dict[tuple[int, int], np.ndarray]


def _blp_from_gammas(times: np.ndarray, gammas: dict[tuple[int, int], np.ndarray]) -> BlpResult:
    per_pair = {}
    for pair, gam in gammas.items():
        distance = np.exp(-np.asarray(gam, dtype=float))
        increments = np.clip(np.diff(distance), 0.0, None)
        per_pair[pair] = np.concatenate([[0.0], np.cumsum(increments)])
    if per_pair:
        total = np.max(np.stack(list(per_pair.values())), axis=0)
    else:
        total = np.zeros(len(times))
    return BlpResult(times=times, total=total, per_pair=per_pair)


def blp_measure(config, t_grid, sites=None) -> BlpResult:
    """BLP non-Markovianity over a time grid for the analytic solvers.

    For each index pair the optimal witness pair (|i> +/- |j>)/sqrt(2) has trace
    distance exp(-gamma_ij(t)); the measure accumulates its positive increments
    and reports the running maximum over pairs.
    """
    times = np.asarray(t_grid, dtype=float)
    gammas: dict[tuple[int, int], np.ndarray] = {}
    if isinstance(config, Model):
        d = config.impurities.d
        stack = np.stack([gamma_matrix(t, config) for t in times])
        for a in range(2**d):
            for b in range(a + 1, 2**d):
                gammas[(a, b)] = stack[:, a, b]
    elif isinstance(config, ContinuumConfig):
        if sites is None or len(sites) != 2:
            raise ValueError("continuum BLP needs exactly two impurity sites")
        l1, l2 = sites
        base = np.array([gamma0(t, config) for t in times])
        pm = np.array([gamma_pm(t, config, l1, l2) for t in times])
        # indices: 0=(0,0), 1=(0,1), 2=(1,0), 3=(1,1)
        for pair in ((0, 1), (0, 2), (1, 3), (2, 3)):
            gammas[pair] = base
        gammas[(0, 3)] = pm[:, 0]
        gammas[(1, 2)] = pm[:, 1]
    else:
        raise TypeError(f"unsupported config type {type(config).__name__}")
    return _blp_from_gammas(times, gammas)


@dataclass(frozen=True)
class RateSignReport:
    """Numeric dephasing rate, the analytic M=3 sign of sin(omega_k t), and
    whether the two agree (None when the analytic form does not apply or the
    rate sits at a zero crossing)."""

    rate: float
    analytic_sign: int | None
    agree: bool | None


def dephasing_rate_sign(
    model: Model, i, j, t: float, *, step: float = 1e-5, zero_tol: float = 1e-6
) -> RateSignReport:
    """Central-difference d(gamma_ij)/dt and, for M = 3, the closed-form sign.

    The M=3 spectrum has a single quasiparticle energy omega at k = 2*pi/(3a),
    so gamma_ij(t) is proportional to sin^2(omega t / 2) and its rate changes
    sign with sin(omega t): the rate is negative exactly when sin(omega t) < 0.
    """
    if t >= step:
        rate = (gamma_finite(i, j, t + step, model) - gamma_finite(i, j, t - step, model)) / (
            2.0 * step
        )
    else:
        rate = (gamma_finite(i, j, t + step, model) - gamma_finite(i, j, t, model)) / step
    analytic: int | None = None
    if model.lattice.M == 3:
        _, _, omega, _, _ = mode_arrays(model)
        s = np.sin(omega[0] * t)
        analytic = 0 if abs(s) < 1e-12 else (1 if s > 0 else -1)
    agree: bool | None = None
    if analytic is not None and abs(rate) > zero_tol and analytic != 0:
        agree = (rate > 0) == (analytic > 0)
    return RateSignReport(rate=float(rate), analytic_sign=analytic, agree=agree)


@dataclass(frozen=True)
class SweepSpec:
    """Axes, solver, witness selection and seeding for one sweep run."""

    solver: str
    eta_values: tuple[float, ...]
    t_values: tuple[float, ...]
    lattice: LatticeConfig | None = None
    impurities: ImpurityConfig | None = None
    continuum_cfg: ContinuumConfig | None = None
    continuum_sites: tuple[int, int] | None = None
    initial_state: str = "plus"
    witnesses: tuple[str, ...] = ("auto",)
    pstar_witness: str = "auto"
    unitary_only: bool = False
    compute_blp: bool = True
    seed: int = 0
    restarts: int = 32
    max_states: int = DEFAULT_MAX_STATES


@dataclass
class CellResult:
    solver: str
    eta: float
    t: float
    wwzb: float | None = None
    gtnl: float | None = None
    horodecki_B: float | None = None
    pstar: float | None = None
    blp: float | None = None
    gamma0: float | None = None
    gamma_plus: float | None = None
    gamma_minus: float | None = None
    error: str | None = None


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: list[CellResult]
    config_hash: str
    revival_omega: float | None

    @property
    def all_ok(self) -> bool:
        return all(cell.error is None for cell in self.cells)

    def to_csv(self, path) -> None:
        write_csv(self, path)

    def to_json(self, path) -> None:
        write_json(self, path)


def worker_count() -> int:
    """Worker cap from COLDBELL_THREADS, defaulting to min(4, cpu count)."""
    env = os.environ.get("COLDBELL_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(4, os.cpu_count() or 1))


def _spec_dict(spec: SweepSpec) -> dict:
    return dataclasses.asdict(spec)


def _config_hash(spec: SweepSpec) -> str:
    payload = json.dumps(_spec_dict(spec), sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def _initial_density(spec: SweepSpec, d: int) -> np.ndarray:
    if spec.initial_state == "plus":
        return plus_state(d)
    if spec.initial_state == "ghz":
        return ghz_state(d)
    if spec.initial_state == "mixed":
        return maximally_mixed(d)
    raise ValueError(f"unknown initial state {spec.initial_state!r}")


def _resolve_witnesses(spec: SweepSpec, d: int) -> tuple[str, ...]:
    if spec.witnesses != ("auto",):
        return spec.witnesses
    if spec.solver == "continuum":
        return ("horodecki",)
    names = ["wwzb"]
    if d == 3:
        names.append("gtnl")
    if d == 2:
        names.append("horodecki")
    return tuple(names)


def _resolve_pstar_witness(spec: SweepSpec, witnesses: tuple[str, ...]) -> str | None:
    if spec.pstar_witness != "auto":
        return spec.pstar_witness if spec.pstar_witness else None
    if "wwzb" in witnesses:
        return "wwzb"
    if "horodecki" in witnesses:
        return "horodecki"
    return None


def _row_states(spec: SweepSpec, eta: float, times: np.ndarray):
    """States along one eta row, plus per-row extras (gammas, blp curve)."""
    extras: dict = {}
    if spec.solver == "continuum":
        cfg = replace(spec.continuum_cfg, eta=float(eta))
        l1, l2 = spec.continuum_sites
        d = 2
        rho0 = _initial_density(spec, d)
        states = [
            reduced_state_two_impurity_continuum(
                rho0, t, cfg, l1, l2, unitary_only=spec.unitary_only
            )
            for t in times
        ]
        base = np.array([gamma0(t, cfg) for t in times])
        pm = np.array([gamma_pm(t, cfg, l1, l2) for t in times])
        extras["gamma0"] = base
        extras["gamma_plus"] = pm[:, 0]
        extras["gamma_minus"] = pm[:, 1]
        if spec.compute_blp:
            extras["blp"] = blp_measure(cfg, times, (l1, l2)).total
        return states, extras

    model = validate_config(spec.lattice, replace(spec.impurities, eta=float(eta)))
    d = model.impurities.d
    rho0 = _initial_density(spec, d)
    if spec.solver == "exact":
        if spec.unitary_only:
            raise ValueError("unitary-only mode needs the analytic gamma of the bogoliubov solver")
        states = list(exact_reduced_states(model, rho0, times, max_states=spec.max_states))
    elif spec.solver == "bogoliubov":
        states = [
            reduced_state_bogoliubov(rho0, t, model, unitary_only=spec.unitary_only)
            for t in times
        ]
        if spec.compute_blp:
            extras["blp"] = blp_measure(model, times).total
    else:
        raise ValueError(f"unknown solver {spec.solver!r}")
    return states, extras


def _sweep_row(spec: SweepSpec, row: int, eta: float, times: np.ndarray) -> list[CellResult]:
    cells = [CellResult(solver=spec.solver, eta=float(eta), t=float(t)) for t in times]
    try:
        states, extras = _row_states(spec, eta, times)
    except Exception as exc:  # row-level failure poisons every cell, not the sweep
        for cell in cells:
            cell.error = f"{type(exc).__name__}: {exc}"
        return cells

    d = int(np.log2(states[0].shape[0]))
    witnesses = _resolve_witnesses(spec, d)
    pstar_witness = _resolve_pstar_witness(spec, witnesses)
    hints: dict[str, np.ndarray | None] = {name: None for name in witnesses}

    for idx, cell in enumerate(cells):
        rng = np.random.default_rng([spec.seed, row, idx])
        try:
            rho = states[idx]
            values: dict[str, float] = {}
            for name in witnesses:
                if name == "horodecki":
                    _, b_value = bell.horodecki(rho)
                    cell.horodecki_B = b_value
                    values["horodecki"] = b_value
                else:
                    best = bell.optimize_bell(
                        rho, name, restarts=spec.restarts, rng=rng, x0_hint=hints[name]
                    )
                    hints[name] = best.angles
                    setattr(cell, name, best.value)
                    values[name] = best.value
            if pstar_witness is not None:
                if pstar_witness == "wwzb" and "wwzb" in values:
                    v = values["wwzb"]
                    cell.pstar = 1.0 / v if v > bell.WWZB_THRESHOLD else None
                elif pstar_witness == "horodecki":
                    m_value, _ = bell.horodecki(rho)
                    cell.pstar = 1.0 / np.sqrt(m_value) if m_value > 1.0 else None
                else:
                    cell.pstar = pstar(
                        rho,
                        pstar_witness,
                        rng=rng,
                        restarts=max(4, spec.restarts // 4),
                        x0_hint=hints.get(pstar_witness),
                    )
            if "blp" in extras:
                cell.blp = float(extras["blp"][idx])
            for key in ("gamma0", "gamma_plus", "gamma_minus"):
                if key in extras:
                    setattr(cell, key, float(extras[key][idx]))
        except Exception as exc:
            cell.error = f"{type(exc).__name__}: {exc}"
    return cells


def sweep(spec: SweepSpec) -> SweepResult:
    """Run the full (eta, t) grid; deterministic for a fixed spec and seed."""
    if spec.solver not in SOLVERS:
        raise ValueError(f"solver must be one of {SOLVERS}, got {spec.solver!r}")
    if spec.solver == "continuum":
        if spec.continuum_cfg is None or spec.continuum_sites is None:
            raise ValueError("continuum sweeps need continuum_cfg and continuum_sites")
    elif spec.lattice is None or spec.impurities is None:
        raise ValueError(f"{spec.solver} sweeps need lattice and impurities configs")

    times = np.asarray(spec.t_values, dtype=float)
    rows = list(enumerate(spec.eta_values))
    workers = worker_count()
    if workers > 1 and len(rows) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            row_cells = list(
                pool.map(lambda item: _sweep_row(spec, item[0], item[1], times), rows)
            )
    else:
        row_cells = [_sweep_row(spec, row, eta, times) for row, eta in rows]

    cells = [cell for chunk in row_cells for cell in chunk]
    revival = None
    if spec.solver != "continuum" and spec.lattice is not None and spec.lattice.M == 3:
        model = validate_config(spec.lattice, spec.impurities)
        _, _, omega, _, _ = mode_arrays(model)
        revival = float(omega[0])
    return SweepResult(
        spec=spec, cells=cells, config_hash=_config_hash(spec), revival_omega=revival
    )


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format(float(value), ".12g")


def write_csv(result: SweepResult, path) -> None:
    lines = []
    meta = (
        f"# coldbell-sweep schema={CSV_SCHEMA} config_hash={result.config_hash}"
        f" seed={result.spec.seed} solver={result.spec.solver}"
    )
    if result.revival_omega is not None:
        meta += f" revival_omega={format(result.revival_omega, '.12g')}"
    lines.append(meta)
    lines.append(",".join(CSV_COLUMNS))
    for cell in result.cells:
        lines.append(",".join(_format_value(getattr(cell, col)) for col in CSV_COLUMNS))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(result: SweepResult, path) -> None:
    payload = {
        "schema": CSV_SCHEMA,
        "config_hash": result.config_hash,
        "seed": result.spec.seed,
        "solver": result.spec.solver,
        "revival_omega": result.revival_omega,
        "spec": _spec_dict(result.spec),
        "cells": [dataclasses.asdict(cell) for cell in result.cells],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


def load_sweep_csv(path) -> tuple[dict, list[dict]]:
    """Read a sweep CSV back into (metadata, rows); empty fields become None."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    meta: dict = {}
    body_start = 0
    for line_no, line in enumerate(raw):
        if line.startswith("#"):
            for token in line.lstrip("# ").split()[1:]:
                key, _, value = token.partition("=")
                meta[key] = value
            body_start = line_no + 1
        else:
            break
    header = raw[body_start].split(",")
    rows = []
    for line in raw[body_start + 1 :]:
        if not line:
            continue
        values = line.split(",")
        record: dict = {}
        for key, value in zip(header, values):
            if key == "solver":
                record[key] = value
            else:
                record[key] = float(value) if value else None
        rows.append(record)
    return meta, rows
