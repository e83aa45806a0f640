"""Qubit-register states, Pauli algebra and density-matrix utilities.

Basis convention: a register index i = (i_1, ..., i_d) with i_j in {0, 1} maps
to the integer i_1 * 2^(d-1) + ... + i_d (qubit 1 is the most significant bit),
and i_j = 1 denotes the excited state |1>.  The Pauli-z operator satisfies
sigma_z |1> = +|1>.
"""

from __future__ import annotations

from functools import lru_cache, reduce

import numpy as np

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "IDENTITY_2",
    "PAULI",
    "StateError",
    "bit_table",
    "bits_to_index",
    "index_to_bits",
    "kron_all",
    "ket_to_density",
    "plus_ket",
    "plus_state",
    "ghz_ket",
    "ghz_state",
    "bell_phi_plus",
    "maximally_mixed",
    "trace_distance",
    "assert_qubit_state",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

# sigma_z|1> = +|1> with basis order (|0>, |1>), hence the sign pattern above.
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


class StateError(ValueError):
    """A density matrix violates a qubit-state invariant."""


@lru_cache(maxsize=16)
def bit_table(d: int) -> np.ndarray:
    """All 2^d bit strings as an int8 array of shape (2^d, d), qubit 1 first."""
    idx = np.arange(2**d)
    shifts = np.arange(d - 1, -1, -1)
    table = ((idx[:, None] >> shifts[None, :]) & 1).astype(np.int8)
    table.setflags(write=False)
    return table


def bits_to_index(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def index_to_bits(index: int, d: int) -> tuple[int, ...]:
    return tuple((index >> s) & 1 for s in range(d - 1, -1, -1))


def kron_all(mats) -> np.ndarray:
    return reduce(np.kron, mats)


def ket_to_density(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def plus_ket(d: int) -> np.ndarray:
    """|+>^(x d), spin-x up on every qubit."""
    return np.full(2**d, 2.0 ** (-d / 2), dtype=complex)


def plus_state(d: int) -> np.ndarray:
    return ket_to_density(plus_ket(d))


def ghz_ket(d: int) -> np.ndarray:
    ket = np.zeros(2**d, dtype=complex)
    ket[0] = ket[-1] = 1.0 / np.sqrt(2.0)
    return ket


def ghz_state(d: int) -> np.ndarray:
    return ket_to_density(ghz_ket(d))


def bell_phi_plus() -> np.ndarray:
    """(|00> + |11>)/sqrt(2) as a density matrix."""
    return ghz_state(2)


def maximally_mixed(d: int) -> np.ndarray:
    n = 2**d
    return np.eye(n, dtype=complex) / n


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """(1/2) tr|a - b| for Hermitian a, b."""
    diff = np.asarray(a) - np.asarray(b)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def assert_qubit_state(
    rho: np.ndarray,
    *,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-10,
    eig_floor: float = -1e-8,
) -> None:
    """Raise StateError unless rho is Hermitian, unit trace and positive
    within the given tolerances."""
    rho = np.asarray(rho)
    n = rho.shape[0]
    if rho.ndim != 2 or rho.shape != (n, n) or n & (n - 1):
        raise StateError(f"not a square 2^d matrix: shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > herm_tol:
        raise StateError(f"Hermiticity violated: max |rho - rho^dag| = {herm:.3e}")
    tr = rho.trace()
    if abs(tr - 1.0) > trace_tol:
        raise StateError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
    lo = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    if lo < eig_floor:
        raise StateError(f"negative eigenvalue {lo:.3e} below floor {eig_floor:.1e}")
