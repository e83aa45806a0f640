"""Physical configuration and the Bogoliubov quasiparticle spectrum.

Units: hbar = 1, energies in units of the hopping J unless stated otherwise,
lattice constant a = 1 by default.  The quasimomentum grid is
k = 2*pi*m/(M*a) for m = 1..M-1; the condensate mode k = 0 is excluded.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

__all__ = [
    "ConfigError",
    "LatticeConfig",
    "ImpurityConfig",
    "Model",
    "BogoliubovMode",
    "validate_config",
    "bogoliubov_modes",
    "mode_arrays",
]


class ConfigError(ValueError):
    """A physical configuration violates a model invariant."""


@dataclass(frozen=True)
class LatticeConfig:
    """Ring-shaped lattice: M sites, hopping J > 0, on-site interaction U >= 0,
    N bosons.  n0_override replaces the default quasicondensate density N/M."""

    M: int
    J: float
    U: float
    N: int
    a: float = 1.0
    n0_override: float | None = None

    @property
    def n0(self) -> float:
        if self.n0_override is not None:
            return self.n0_override
        return self.N / self.M


@dataclass(frozen=True)
class ImpurityConfig:
    """d impurity qubits pinned at distinct ring sites (1-based indices),
    bare splitting omega0 and density-density coupling eta >= 0."""

    d: int
    sites: tuple[int, ...]
    omega0: float = 1.0
    eta: float = 0.0


@dataclass(frozen=True)
class Model:
    """Validated lattice + impurity configuration.

    Immutable after validation; safe to share across threads.
    """

    lattice: LatticeConfig
    impurities: ImpurityConfig

    @property
    def n0(self) -> float:
        return self.lattice.n0

    @property
    def omega_bar(self) -> float:
        """Renormalised qubit splitting omega0 + eta * n0."""
        return self.impurities.omega0 + self.impurities.eta * self.n0

    def with_eta(self, eta: float) -> "Model":
        return Model(self.lattice, replace(self.impurities, eta=float(eta)))

    def with_omega0(self, omega0: float) -> "Model":
        return Model(self.lattice, replace(self.impurities, omega0=float(omega0)))


@dataclass(frozen=True)
class BogoliubovMode:
    """Quasiparticle mode at k = 2*pi*m/(M*a): single-particle energy epsilon,
    quasiparticle energy omega, qubit coupling weight xi and dephasing weight nu."""

    m: int
    k: float
    epsilon: float
    omega: float
    xi: float
    nu: float

    def f(self, t: float) -> float:
        """Displacement amplitude f_k(t) = 2 xi sin(omega t / 2) / omega."""
        return 2.0 * self.xi * np.sin(0.5 * self.omega * t) / self.omega


def validate_config(lattice: LatticeConfig, impurities: ImpurityConfig) -> Model:
    """Check all configuration invariants and return the validated model."""
    if int(lattice.M) != lattice.M or lattice.M < 2:
        raise ConfigError(f"need at least 2 lattice sites, got M={lattice.M}")
    if not lattice.J > 0:
        raise ConfigError(f"hopping must be positive, got J={lattice.J}")
    if lattice.U < 0:
        raise ConfigError(f"on-site interaction must be nonnegative, got U={lattice.U}")
    if int(lattice.N) != lattice.N or lattice.N < 1:
        raise ConfigError(f"need at least one boson, got N={lattice.N}")
    if not lattice.a > 0:
        raise ConfigError(f"lattice constant must be positive, got a={lattice.a}")
    if not lattice.n0 > 0:
        raise ConfigError(f"quasicondensate density must be positive, got n0={lattice.n0}")

    sites = tuple(int(s) for s in impurities.sites)
    d = impurities.d
    if d != len(sites):
        raise ConfigError(f"d={d} does not match {len(sites)} impurity sites")
    if not 1 <= d <= lattice.M:
        raise ConfigError(f"need 1 <= d <= M, got d={d}, M={lattice.M}")
    if len(set(sites)) != d:
        raise ConfigError(f"impurity sites must be pairwise distinct, got {sites}")
    if any(not 1 <= s <= lattice.M for s in sites):
        raise ConfigError(f"impurity sites must lie in 1..{lattice.M}, got {sites}")
    if impurities.eta < 0:
        raise ConfigError(f"coupling must be nonnegative, got eta={impurities.eta}")

    normalized = ImpurityConfig(
        d=d, sites=sites, omega0=float(impurities.omega0), eta=float(impurities.eta)
    )
    return Model(lattice=lattice, impurities=normalized)


@lru_cache(maxsize=128)
def mode_arrays(model: Model) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Spectrum arrays (k, epsilon, omega, xi, nu) over m = 1..M-1, cached per model."""
    lat = model.lattice
    eta = model.impurities.eta
    m = np.arange(1, lat.M)
    k = 2.0 * np.pi * m / (lat.M * lat.a)
    eps = 4.0 * lat.J * np.sin(0.5 * k * lat.a) ** 2
    omega = np.sqrt(eps**2 + 2.0 * lat.U * lat.n0 * eps)
    xi = eta * np.sqrt(lat.n0 * eps / (omega * lat.M))
    nu = 2.0 * eta**2 * lat.n0 * eps / (omega**3 * lat.M)
    for arr in (k, eps, omega, xi, nu):
        arr.setflags(write=False)
    return k, eps, omega, xi, nu


def bogoliubov_modes(model: Model) -> list[BogoliubovMode]:
    """All M-1 quasiparticle modes of the validated model."""
    k, eps, omega, xi, nu = mode_arrays(model)
    return [
        BogoliubovMode(m=m, k=float(k[m - 1]), epsilon=float(eps[m - 1]),
                       omega=float(omega[m - 1]), xi=float(xi[m - 1]), nu=float(nu[m - 1]))
        for m in range(1, model.lattice.M)
    ]
