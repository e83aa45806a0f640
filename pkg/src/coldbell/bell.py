"""Bell nonlocality witnesses and measurement-setting optimization.

Implements the WWZB family of two-setting correlation inequalities as the
single nonlinear functional sum_r |xi~(r)|, the tripartite inequality whose
violation certifies genuine tripartite nonlocality (GTNL), the two-qubit
Horodecki/CHSH criterion, and a seeded multistart simplex optimizer over the
4d Bloch angles of projective spin measurements.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .states import IDENTITY_2, PAULI

__all__ = [
    "MeasurementSettings",
    "BellOptimum",
    "bloch_from_angles",
    "correlation_tensor",
    "correlator",
    "all_correlators",
    "walsh_coefficients",
    "wwzb_value",
    "gtnl_value",
    "chsh_value",
    "horodecki",
    "optimize_bell",
]

PAULI4 = np.concatenate([IDENTITY_2[None], PAULI])  # identity + Pauli vector

# Decision threshold guarding against float noise when flagging nonlocality.
WWZB_THRESHOLD = 1.0 + 1e-9


def bloch_from_angles(theta, phi) -> np.ndarray:
    """Unit Bloch vector(s) (sin t cos p, sin t sin p, cos t); broadcasts."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1
    )


@dataclass(frozen=True, eq=False)
class MeasurementSettings:
    """Bloch vectors u[party, setting] defining the +/-1 observables u . sigma."""

    vectors: np.ndarray  # shape (d, 2, 3)

    def __post_init__(self):
        arr = np.array(self.vectors, dtype=float)
        if arr.ndim != 3 or arr.shape[1:] != (2, 3):
            raise ValueError(f"settings must have shape (d, 2, 3), got {arr.shape}")
        norms = np.linalg.norm(arr, axis=-1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("measurement Bloch vectors must have unit norm")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @property
    def d(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def from_angles(cls, angles) -> "MeasurementSettings":
        """Build from polar/azimuthal angles of shape (d, 2, 2)."""
        angles = np.asarray(angles, dtype=float)
        return cls(bloch_from_angles(angles[..., 0], angles[..., 1]))


def _num_qubits(rho: np.ndarray) -> int:
    n = rho.shape[0]
    d = int(n).bit_length() - 1
    if rho.shape != (n, n) or 2**d != n:
        raise ValueError(f"state must be 2^d x 2^d, got shape {rho.shape}")
    return d


@lru_cache(maxsize=8)
def _tensor_spec(d: int) -> str:
    rows = string.ascii_lowercase[:d]
    cols = string.ascii_lowercase[d : 2 * d]
    outs = string.ascii_lowercase[2 * d : 3 * d]
    operands = ",".join(outs[j] + cols[j] + rows[j] for j in range(d))
    return f"{rows}{cols},{operands}->{outs}"


def correlation_tensor(rho: np.ndarray) -> np.ndarray:
    """Full Pauli moment tensor G[a_1..a_d] = tr[rho sigma_{a_1} x ... x sigma_{a_d}]
    with index 0 the identity; real for Hermitian input."""
    rho = np.asarray(rho, dtype=complex)
    d = _num_qubits(rho)
    tensor = rho.reshape((2,) * (2 * d))
    return np.real(np.einsum(_tensor_spec(d), tensor, *([PAULI4] * d)))


@lru_cache(maxsize=8)
def _contract_spec(d: int) -> str:
    axes = string.ascii_lowercase[:d]
    outs = string.ascii_lowercase[d : 2 * d]
    operands = ",".join(outs[j] + axes[j] for j in range(d))
    return f"{axes},{operands}->{outs}"


def _observable_rows(vectors: np.ndarray) -> np.ndarray:
    d = vectors.shape[0]
    return np.concatenate([np.zeros((d, 2, 1)), vectors], axis=2)  # (d, 2, 4)


@lru_cache(maxsize=8)
def _contract_path(d: int):
    dummy_moments = np.zeros((4,) * d)
    dummy_rows = [np.zeros((2, 4))] * d
    return np.einsum_path(_contract_spec(d), dummy_moments, *dummy_rows, optimize="greedy")[0]


def _xi_from_tensor(moments: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    rows = _observable_rows(vectors)
    d = vectors.shape[0]
    if d <= 4:  # plain dispatch beats the path machinery for tiny tensors
        return np.einsum(_contract_spec(d), moments, *rows)
    return np.einsum(_contract_spec(d), moments, *rows, optimize=_contract_path(d))


def all_correlators(rho: np.ndarray, settings: MeasurementSettings) -> np.ndarray:
    """xi(s) for every setting choice s in {0,1}^d, as a (2,)*d array."""
    return _xi_from_tensor(correlation_tensor(rho), settings.vectors)


def correlator(rho: np.ndarray, settings: MeasurementSettings, s) -> float:
    """Single full correlator xi(s) = <A^(1)_{s_1} ... A^(d)_{s_d}>."""
    return float(all_correlators(rho, settings)[tuple(int(b) for b in s)])


@lru_cache(maxsize=8)
def _sign_matrix(n: int) -> np.ndarray:
    """Walsh-Hadamard sign matrix H[r, s] = (-1)^{r.s} for flat indices."""
    idx = np.arange(n)
    bits = (idx[:, None] & idx[None, :])
    parity = np.zeros((n, n), dtype=np.int64)
    while bits.any():
        parity ^= bits & 1
        bits >>= 1
    matrix = 1.0 - 2.0 * parity
    matrix.setflags(write=False)
    return matrix


def walsh_coefficients(xi: np.ndarray) -> np.ndarray:
    """xi~(r) = 2^{-d} sum_s (-1)^{r.s} xi(s), flattened over r."""
    flat = np.asarray(xi, dtype=float).reshape(-1)
    return (_sign_matrix(flat.shape[0]) @ flat) / flat.shape[0]


def _wwzb_from_tensor(moments: np.ndarray, vectors: np.ndarray) -> float:
    xi = _xi_from_tensor(moments, vectors)
    return float(np.sum(np.abs(walsh_coefficients(xi))))


def wwzb_value(rho: np.ndarray, settings: MeasurementSettings) -> float:
    """sum_r |xi~(r)|; values above 1 witness nonlocality."""
    return _wwzb_from_tensor(correlation_tensor(rho), settings.vectors)


def _gtnl_from_tensor(moments: np.ndarray, vectors: np.ndarray) -> float:
    # Projector coefficient rows: Pi_{0|x} = (I + u_x . sigma)/2.
    proj = 0.5 * np.concatenate([np.ones((3, 2, 1)), vectors], axis=2)
    triple = np.einsum("abc,xa,yb,zc->xyz", moments, proj[0], proj[1], proj[2])
    p_ab = np.einsum("ab,xa,yb->xy", moments[:, :, 0], proj[0], proj[1])
    p_bc = np.einsum("bc,yb,zc->yz", moments[0, :, :], proj[1], proj[2])
    p_ac = np.einsum("ac,xa,zc->xz", moments[:, 0, :], proj[0], proj[2])
    return float(
        -2.0 * (p_ab[1, 1] + p_bc[1, 1] + p_ac[1, 1])
        - (triple[0, 0, 1] + triple[0, 1, 0] + triple[1, 0, 0])
        + 2.0 * (triple[1, 1, 0] + triple[1, 0, 1] + triple[0, 1, 1])
        + 2.0 * triple[1, 1, 1]
    )


def gtnl_value(rho: np.ndarray, settings: MeasurementSettings) -> float:
    """Value of the genuine-tripartite-nonlocality inequality; positive values
    witness GTNL (the local bound is 0)."""
    if _num_qubits(np.asarray(rho)) != 3 or settings.d != 3:
        raise ValueError("the GTNL inequality is defined for exactly three qubits")
    return _gtnl_from_tensor(correlation_tensor(rho), settings.vectors)


def _chsh_from_tensor(moments: np.ndarray, vectors: np.ndarray) -> float:
    xi = _xi_from_tensor(moments, vectors)
    return float(xi[0, 0] + xi[0, 1] + xi[1, 0] - xi[1, 1])


def chsh_value(rho: np.ndarray, settings: MeasurementSettings) -> float:
    """CHSH combination xi(00) + xi(01) + xi(10) - xi(11) (local bound 2)."""
    if settings.d != 2:
        raise ValueError("CHSH is defined for exactly two qubits")
    return _chsh_from_tensor(correlation_tensor(rho), settings.vectors)


def horodecki(rho: np.ndarray) -> tuple[float, float]:
    """Two-qubit CHSH criterion: M = sum of the two largest eigenvalues of
    T^T T with T_ij = tr[sigma_i x sigma_j rho]; B = sqrt(max(0, M - 1))."""
    rho = np.asarray(rho, dtype=complex)
    if _num_qubits(rho) != 2:
        raise ValueError("the Horodecki criterion applies to two-qubit states")
    t_matrix = correlation_tensor(rho)[1:, 1:]
    eigs = np.linalg.eigvalsh(t_matrix.T @ t_matrix)
    m_value = float(eigs[-1] + eigs[-2])
    return m_value, float(np.sqrt(max(0.0, m_value - 1.0)))


_OBJECTIVES = {
    "wwzb": _wwzb_from_tensor,
    "gtnl": _gtnl_from_tensor,
    "chsh": _chsh_from_tensor,
}


@dataclass(frozen=True)
class BellOptimum:
    """Best value found, its settings and angles, and a convergence flag."""

    value: float
    settings: MeasurementSettings
    angles: np.ndarray
    converged: bool


def optimize_bell(
    rho: np.ndarray,
    inequality: str = "wwzb",
    *,
    restarts: int = 32,
    seed: int = 0,
    rng: np.random.Generator | None = None,
    xatol: float = 1e-6,
    x0_hint: np.ndarray | None = None,
    maxiter: int | None = None,
) -> BellOptimum:
    """Maximise a witness over all measurement angles by multistart Nelder-Mead.

    Deterministic given the seed (or generator state); the reported value is a
    lower bound on the true maximum.  x0_hint seeds one extra restart, which is
    useful for warm-starting along a parameter sweep.
    """
    rho = np.asarray(rho, dtype=complex)
    d = _num_qubits(rho)
    if inequality not in _OBJECTIVES:
        raise ValueError(f"unknown inequality {inequality!r}")
    if inequality == "gtnl" and d != 3:
        raise ValueError("the GTNL inequality needs d = 3")
    if inequality == "chsh" and d != 2:
        raise ValueError("CHSH needs d = 2")
    objective = _OBJECTIVES[inequality]
    moments = correlation_tensor(rho)
    n_params = 4 * d

    def negated(flat: np.ndarray) -> float:
        angles = flat.reshape(d, 2, 2)
        vectors = bloch_from_angles(angles[..., 0], angles[..., 1])
        return -objective(moments, vectors)

    if rng is None:
        rng = np.random.default_rng(seed)
    starts = []
    if x0_hint is not None:
        starts.append(np.asarray(x0_hint, dtype=float).reshape(n_params))
    for _ in range(restarts):
        theta = rng.uniform(0.0, np.pi, size=2 * d)
        phi_angles = rng.uniform(0.0, 2.0 * np.pi, size=2 * d)
        starts.append(np.stack([theta, phi_angles], axis=-1).reshape(n_params))

    best_value = -np.inf
    best_angles = starts[0]
    any_converged = False
    options = {
        "xatol": xatol,
        "fatol": 1e-10,
        "maxiter": maxiter or 250 * n_params,
        "maxfev": maxiter or 250 * n_params,
    }
    for x0 in starts:
        result = minimize(negated, x0, method="Nelder-Mead", options=options)
        any_converged = any_converged or bool(result.success)
        if -result.fun > best_value:
            best_value = -result.fun
            best_angles = result.x
    angles = best_angles.reshape(d, 2, 2)
    settings = MeasurementSettings.from_angles(angles)
    return BellOptimum(
        value=float(best_value), settings=settings, angles=angles, converged=any_converged
    )
