"""Large-lattice dephasing via momentum integrals with a low-momentum cutoff.

The discrete mode sums become integrals through sum_k -> M * int_{-1/2}^{1/2} dq
with k = 2*pi*q/a; the negative-q half folds into a factor 2 on [q0, 1/2]
because every integrand used here is even in q.  The cutoff q0 = 1/M regulates
the infrared divergence of a finite lattice with M sites.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quadrature import adaptive_panel_quad
from .states import bit_table

__all__ = [
    "ContinuumConfig",
    "gamma_continuum",
    "gamma0",
    "gamma_cross",
    "gamma_pm",
    "c_coeff_continuum",
    "local_phase_continuum",
    "phi_continuum",
    "reduced_state_two_impurity_continuum",
]


@dataclass(frozen=True)
class ContinuumConfig:
    """Large-lattice parameters: density n0 (atoms per site), interaction U,
    hopping J, coupling eta, bare splitting omega0 and momentum cutoff q0."""

    n0: float
    U: float
    J: float = 1.0
    eta: float = 0.0
    omega0: float = 1.0
    q0: float = 1e-6
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_rounds: int = 60

    def __post_init__(self):
        if not 0.0 < self.q0 < 0.5:
            raise ValueError(f"cutoff must satisfy 0 < q0 < 1/2, got {self.q0}")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.n0 <= 0 or self.J <= 0 or self.U < 0 or self.eta < 0:
            raise ValueError("need n0 > 0, J > 0, U >= 0 and eta >= 0")

    @property
    def omega_bar(self) -> float:
        return self.omega0 + self.eta * self.n0


def _dispersion(cfg: ContinuumConfig, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    eps = 4.0 * cfg.J * np.sin(np.pi * q) ** 2
    omega = np.sqrt(eps**2 + 2.0 * cfg.U * cfg.n0 * eps)
    return eps, omega


def _omega_max(cfg: ContinuumConfig) -> float:
    eps = 4.0 * cfg.J
    return float(np.sqrt(eps**2 + 2.0 * cfg.U * cfg.n0 * eps))


def _initial_edges(cfg: ContinuumConfig, t: float) -> np.ndarray:
    """Panel seeds: geometric refinement out of the cutoff (the kernel grows
    like 1/q there) plus oscillation-limited uniform panels of width
    <= pi / (omega_max * t)."""
    edges = [cfg.q0]
    q = cfg.q0
    while q < 0.02:
        q *= 2.0
        edges.append(min(q, 0.02))
    width = 0.05
    if t > 0.0:
        width = min(width, np.pi / (_omega_max(cfg) * t))
    width = max(width, 0.48 / 60_000)  # panel-count ceiling for extreme times
    edges.extend(np.arange(0.02 + width, 0.5, width))
    return np.asarray(edges, dtype=float)


def _integrate(cfg: ContinuumConfig, f, t: float) -> float:
    return adaptive_panel_quad(
        f,
        cfg.q0,
        0.5,
        rel_tol=cfg.rel_tol,
        abs_tol=cfg.abs_tol,
        initial_edges=_initial_edges(cfg, t),
        max_rounds=cfg.max_rounds,
    )


def gamma0(t: float, cfg: ContinuumConfig) -> float:
    """Single-impurity dephasing exponent
    Gamma_0(t) = 4 eta^2 n0 int_{q0}^{1/2} (eps_q/omega_q^3) sin^2(omega_q t/2) dq."""
    if t == 0.0 or cfg.eta == 0.0:
        return 0.0

    def integrand(q):
        eps, omega = _dispersion(cfg, q)
        return eps / omega**3 * np.sin(0.5 * omega * t) ** 2

    return 4.0 * cfg.eta**2 * cfg.n0 * _integrate(cfg, integrand, t)


def gamma_cross(t: float, cfg: ContinuumConfig, l1: int, l2: int) -> float:
    """Interference term Gamma(t) = 8 eta^2 n0 int (eps/omega^3) sin^2(omega t/2)
    cos(2 pi q (l1 - l2)) dq; may take either sign."""
    if t == 0.0 or cfg.eta == 0.0:
        return 0.0
    separation = float(l1 - l2)

    def integrand(q):
        eps, omega = _dispersion(cfg, q)
        return eps / omega**3 * np.sin(0.5 * omega * t) ** 2 * np.cos(2.0 * np.pi * q * separation)

    return 8.0 * cfg.eta**2 * cfg.n0 * _integrate(cfg, integrand, t)


def gamma_pm(t: float, cfg: ContinuumConfig, l1: int, l2: int) -> tuple[float, float]:
    """Collective rates Gamma_+- = 2 Gamma_0 +- Gamma for two impurities."""
    base = gamma0(t, cfg)
    cross = gamma_cross(t, cfg, l1, l2)
    return 2.0 * base + cross, 2.0 * base - cross


def gamma_continuum(i, j, t: float, cfg: ContinuumConfig, sites) -> float:
    """General dephasing exponent 4 eta^2 n0 int (eps/omega^3) sin^2(omega t/2)
    S_ij(q) dq with S_ij(q) = |sum_m exp(2 i pi q l_m)(i_m - j_m)|^2."""
    delta = np.asarray(i, dtype=float) - np.asarray(j, dtype=float)
    if t == 0.0 or cfg.eta == 0.0 or not np.any(delta):
        return 0.0
    positions = np.asarray(sites, dtype=float)

    def integrand(q):
        eps, omega = _dispersion(cfg, q)
        structure = np.abs(np.exp(2j * np.pi * np.outer(q, positions)) @ delta) ** 2
        return eps / omega**3 * np.sin(0.5 * omega * t) ** 2 * structure

    return 4.0 * cfg.eta**2 * cfg.n0 * _integrate(cfg, integrand, t)


@lru_cache(maxsize=256)
def _static_zz_integral(cfg: ContinuumConfig, separation: float) -> float:
    """Time-independent part int (eps/omega^2) cos(2 pi q separation) dq of the
    ZZ coefficient; smooth, so no oscillation seeding is needed."""

    def integrand(q):
        eps, omega = _dispersion(cfg, q)
        return eps / omega**2 * np.cos(2.0 * np.pi * q * separation)

    return _integrate(cfg, integrand, 0.0)


@lru_cache(maxsize=8192)
def _c_coeff_cached(t: float, cfg: ContinuumConfig, separation: float) -> float:
    def oscillatory(q):
        eps, omega = _dispersion(cfg, q)
        return eps / omega**3 * np.sin(omega * t) * np.cos(2.0 * np.pi * q * separation)

    osc = _integrate(cfg, oscillatory, t)
    return cfg.eta**2 * cfg.n0 * (osc - t * _static_zz_integral(cfg, separation))


def c_coeff_continuum(t: float, cfg: ContinuumConfig, separation: float) -> float:
    """Continuum ZZ coefficient
    c(t) = eta^2 n0 int (eps/omega^3)(sin(omega t) - omega t) cos(2 pi q dl) dq."""
    if t == 0.0 or cfg.eta == 0.0:
        return 0.0
    return _c_coeff_cached(float(t), cfg, abs(float(separation)))


def local_phase_continuum(t: float, cfg: ContinuumConfig, sites, j: int) -> float:
    """omega_j(t) = omega_bar t / 2 + sum_m c_jm(t) for the 1-based qubit j."""
    positions = list(sites)
    lj = positions[j - 1]
    total = 0.5 * cfg.omega_bar * t
    for lm in positions:
        total += c_coeff_continuum(t, cfg, lj - lm)
    return total


def phi_continuum(i, j, t: float, cfg: ContinuumConfig, sites) -> float:
    """Continuum phase phi_ij(t) from the local and ZZ terms.

    The displacement cross term of the finite-lattice phase is odd in q and
    integrates to zero over the symmetric momentum domain, so it drops out
    exactly here.
    """
    i = np.asarray(i, dtype=int)
    j = np.asarray(j, dtype=int)
    d = len(sites)
    positions = np.asarray(sites, dtype=float)
    cmat = np.empty((d, d))
    for r in range(d):
        for s in range(d):
            cmat[r, s] = c_coeff_continuum(t, cfg, positions[r] - positions[s])
    local = 0.5 * cfg.omega_bar * t + cmat.sum(axis=1)
    sign_i = 1.0 - 2.0 * i
    sign_j = 1.0 - 2.0 * j
    term1 = float(local @ (sign_i - sign_j))
    upper = np.triu(cmat, k=1)
    term2 = float(
        np.einsum("r,s,rs->", sign_j, sign_j, upper) - np.einsum("r,s,rs->", sign_i, sign_i, upper)
    )
    return term1 + term2


def reduced_state_two_impurity_continuum(
    rho0: np.ndarray,
    t: float,
    cfg: ContinuumConfig,
    l1: int,
    l2: int,
    *,
    unitary_only: bool = False,
) -> np.ndarray:
    """Two-qubit reduced state in a large lattice: single-flip coherences decay
    with Gamma_0, the (11)-(00) coherence with Gamma_+ and the (10)-(01)
    coherence with Gamma_-; phases come from the continuum ZZ coefficients.

    unitary_only=True suppresses the damping and keeps only the phases."""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (4, 4):
        raise ValueError(f"two-impurity state must be 4 x 4, got {rho0.shape}")
    gam = np.zeros((4, 4))
    if not unitary_only:
        plus, minus = gamma_pm(t, cfg, l1, l2)
        base = 0.25 * (plus + minus)  # = Gamma_0, avoids a third quadrature
        for a, b in ((3, 2), (3, 1), (2, 0), (1, 0)):
            gam[a, b] = gam[b, a] = base
        gam[3, 0] = gam[0, 3] = plus
        gam[2, 1] = gam[1, 2] = minus

    table = bit_table(2)
    phimat = np.zeros((4, 4))
    for a in range(4):
        for b in range(a + 1, 4):
            phimat[a, b] = phi_continuum(table[a], table[b], t, cfg, (l1, l2))
            phimat[b, a] = -phimat[a, b]
    return np.exp(-gam + 1j * phimat) * rho0
