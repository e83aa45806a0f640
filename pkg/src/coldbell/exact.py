"""Exact zero-temperature dynamics of impurity qubits coupled to a Bose-Hubbard ring.

The total Hamiltonian conserves every qubit sigma_z, so the full evolution block
decomposes over the 2^d qubit configurations: each block evolves the gas under a
conditional Hamiltonian H_i = H_BH + eta * sum_{j: i_j=1} n_{l_j}, and the reduced
qubit state follows from overlaps of the 2^d conditionally evolved gas states.
This keeps the propagated dimension at C(N+M-1, M-1) instead of
2^d * C(N+M-1, M-1).
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .model import Model
from .states import bit_table

__all__ = [
    "BasisSizeError",
    "GroundStateError",
    "PropagationError",
    "FockBasis",
    "build_fock_basis",
    "build_bh_hamiltonian",
    "conditional_hamiltonian",
    "ground_state",
    "propagate",
    "exact_reduced_state",
    "exact_reduced_states",
]

DEFAULT_MAX_STATES = 2_000_000
DEFAULT_KRYLOV_DIM = 30
DEFAULT_LOCAL_TOL = 1e-10
DEFAULT_NORM_TOL = 1e-8


class BasisSizeError(MemoryError):
    """The requested Fock basis exceeds the configured memory bound."""


class GroundStateError(RuntimeError):
    """The iterative eigensolver failed to reach the requested residual."""


class PropagationError(RuntimeError):
    """Time stepping failed (step-size underflow or norm drift)."""


class FockBasis:
    """Ordered occupation-number basis for N bosons on M sites.

    States are enumerated with the first-site occupation descending, e.g.
    (M=2, N=2) -> (2,0), (1,1), (0,2).  Total boson number is fixed, so
    propagation never mixes Fock sectors by construction.
    """

    def __init__(self, M: int, N: int, states: np.ndarray):
        self.M = M
        self.N = N
        self.states = states
        self._index = {tuple(row): i for i, row in enumerate(states.tolist())}

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def size(self) -> int:
        return self.states.shape[0]

    def index_of(self, occ) -> int:
        return self._index[tuple(int(n) for n in occ)]

    def occupation(self, index: int) -> tuple[int, ...]:
        return tuple(int(n) for n in self.states[index])


def _enumerate_occupations(M: int, N: int):
    if M == 1:
        yield (N,)
        return
    for n in range(N, -1, -1):
        for rest in _enumerate_occupations(M - 1, N - n):
            yield (n, *rest)


def build_fock_basis(M: int, N: int, max_states: int = DEFAULT_MAX_STATES) -> FockBasis:
    """Enumerate the complete fixed-N Fock basis."""
    if M < 2 or N < 1:
        raise ValueError(f"need M >= 2 and N >= 1, got M={M}, N={N}")
    size = math.comb(N + M - 1, M - 1)
    if size > max_states:
        raise BasisSizeError(
            f"Fock basis for M={M}, N={N} has {size} states, above the bound {max_states}"
        )
    states = np.fromiter(
        (n for occ in _enumerate_occupations(M, N) for n in occ),
        dtype=np.int64,
        count=size * M,
    ).reshape(size, M)
    return FockBasis(M, N, states)


def build_bh_hamiltonian(basis: FockBasis, J: float, U: float) -> sp.csr_matrix:
    """Bose-Hubbard ring Hamiltonian on the fixed-N basis.

    Implements -J sum_{j=1}^{M} (a^dag_{j+1} a_j + h.c.) + (U/2) sum_j n_j(n_j - 1)
    with the wrap a_{M+1} = a_1 taken literally, so the M=2 ring carries a doubled
    bond (both j=1 and j=2 hop across the same pair of sites).
    """
    M = basis.M
    occ = basis.states
    size = basis.size

    diag = 0.5 * U * np.sum(occ * (occ - 1), axis=1).astype(np.float64)

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    src = np.arange(size)
    for j in range(M):
        j2 = (j + 1) % M
        movable = occ[:, j] > 0
        amp = np.sqrt(occ[movable, j] * (occ[movable, j2] + 1.0))
        shifted = occ[movable].copy()
        shifted[:, j] -= 1
        shifted[:, j2] += 1
        dst = np.fromiter(
            (basis.index_of(row) for row in shifted.tolist()), dtype=np.int64, count=len(amp)
        )
        # a^dag_{j+1} a_j and its Hermitian conjugate a^dag_j a_{j+1}
        rows.extend([dst, src[movable]])
        cols.extend([src[movable], dst])
        vals.extend([-J * amp, -J * amp])

    ham = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    ).tocsr()
    ham += sp.diags(diag)
    return ham.tocsr()


def conditional_hamiltonian(
    h_bh: sp.spmatrix, basis: FockBasis, bits, model: Model
) -> tuple[sp.csr_matrix, float]:
    """Gas Hamiltonian conditioned on the qubit configuration, plus the scalar
    qubit energy E_i = (omega0/2) sum_j (2 i_j - 1) kept as a separate phase."""
    imp = model.impurities
    bits = np.asarray(bits, dtype=np.int64)
    coupled = [imp.sites[j] - 1 for j in range(imp.d) if bits[j] == 1]
    energy = 0.5 * imp.omega0 * float(np.sum(2 * bits - 1))
    if not coupled or imp.eta == 0.0:
        return h_bh.tocsr(), energy
    diag = imp.eta * np.sum(basis.states[:, coupled], axis=1).astype(np.float64)
    return (h_bh + sp.diags(diag)).tocsr(), energy


def ground_state(
    H: sp.spmatrix, *, residual_tol: float = 1e-10, maxiter: int | None = None
) -> tuple[float, np.ndarray]:
    """Lowest eigenpair with residual ||H psi - E psi|| < residual_tol."""
    n = H.shape[0]
    if n <= 64:
        evals, evecs = sla.eigh(np.asarray(H.todense()))
        energy, vec = float(evals[0]), evecs[:, 0]
    else:
        v0 = np.full(n, 1.0 / math.sqrt(n))  # fixed start keeps runs reproducible
        try:
            evals, evecs = eigsh(H, k=1, which="SA", v0=v0, maxiter=maxiter, ncv=min(n, 60))
        except Exception as exc:  # ARPACK non-convergence
            raise GroundStateError(f"eigensolver failed: {exc}") from exc
        energy, vec = float(evals[0]), evecs[:, 0]
    vec = vec / np.linalg.norm(vec)
    residual = float(np.linalg.norm(H @ vec - energy * vec))
    if residual > residual_tol:
        raise GroundStateError(
            f"ground-state residual {residual:.3e} above tolerance {residual_tol:.1e}"
        )
    return energy, vec.astype(np.complex128)


def _lanczos(H, v: np.ndarray, m: int):
    """Lanczos tridiagonalisation with one reorthogonalisation pass.

    Returns (V, alphas, betas, beta_next) where V rows span the Krylov space.
    beta_next == 0 signals an invariant subspace (happy breakdown).
    """
    n = v.shape[0]
    m = min(m, n)
    V = np.empty((m, n), dtype=np.complex128)
    alphas = np.empty(m)
    betas = np.empty(max(m - 1, 0))
    V[0] = v
    w = H @ v
    alphas[0] = np.vdot(V[0], w).real
    w = w - alphas[0] * V[0]
    j = 1
    while j < m:
        b = np.linalg.norm(w)
        if b < 1e-13:
            return V[:j], alphas[:j], betas[: j - 1], 0.0
        V[j] = w / b
        w = H @ V[j]
        w -= b * V[j - 1]
        a = np.vdot(V[j], w).real
        w -= a * V[j]
        coeffs = V[: j + 1].conj() @ w
        w -= V[: j + 1].T @ coeffs
        alphas[j] = a
        betas[j - 1] = b
        j += 1
    return V, alphas, betas, float(np.linalg.norm(w))


def _krylov_step(H, psi: np.ndarray, dt: float, m: int) -> tuple[np.ndarray, float]:
    """One short-iterative-Lanczos step psi -> exp(-i H dt) psi with an error proxy."""
    nrm = np.linalg.norm(psi)
    V, alphas, betas, beta_next = _lanczos(H, psi / nrm, m)
    evals, evecs = sla.eigh_tridiagonal(alphas, betas)
    y = evecs @ (np.exp(-1j * dt * evals) * evecs[0])
    err = abs(beta_next * y[-1])
    return nrm * (V.T @ y), err


def propagate(
    H: sp.spmatrix,
    psi0: np.ndarray,
    t: float,
    *,
    krylov_dim: int = DEFAULT_KRYLOV_DIM,
    local_tol: float = DEFAULT_LOCAL_TOL,
    norm_tol: float = DEFAULT_NORM_TOL,
) -> np.ndarray:
    """Evolve psi0 under exp(-i H t) with adaptive short-iterative-Lanczos stepping.

    The sub-step size is reduced until the local error proxy stays below
    local_tol per unit time; the result is deterministic given the tolerances.
    """
    psi = np.asarray(psi0, dtype=np.complex128).copy()
    if t == 0.0:
        return psi
    norm_in = np.linalg.norm(psi)
    remaining = float(t)
    dt = remaining
    min_step = abs(t) * 1e-12
    while abs(remaining) > abs(t) * 1e-15:
        if abs(dt) > abs(remaining):
            dt = remaining
        psi_new, err = _krylov_step(H, psi, dt, krylov_dim)
        budget = local_tol * abs(dt)
        if err > budget:
            if abs(dt) * 0.5 < min_step:
                raise PropagationError(f"step size underflow at dt={dt:.3e}")
            dt *= 0.5
            continue
        psi = psi_new
        remaining -= dt
        if err < 0.01 * budget:
            dt *= 2.0
    drift = abs(np.linalg.norm(psi) - norm_in)
    if drift > norm_tol:
        raise PropagationError(f"norm drift {drift:.3e} above tolerance {norm_tol:.1e}")
    return psi


def exact_reduced_states(
    model: Model,
    rho0: np.ndarray,
    times,
    *,
    krylov_dim: int = DEFAULT_KRYLOV_DIM,
    local_tol: float = DEFAULT_LOCAL_TOL,
    norm_tol: float = DEFAULT_NORM_TOL,
    max_states: int = DEFAULT_MAX_STATES,
) -> np.ndarray:
    """Reduced qubit states at the given times, stacked as (len(times), 2^d, 2^d).

    [rho_S(t)]_{ij} = exp(-i (E_i - E_j) t) <psi_j(t)|psi_i(t)> [rho_S(0)]_{ij}
    with psi_i(t) = exp(-i H_i t)|GS>.  Diagonals equal those of rho0 exactly.
    """
    lat = model.lattice
    d = model.impurities.d
    times = np.atleast_1d(np.asarray(times, dtype=float))
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (2**d, 2**d):
        raise ValueError(f"rho0 must be {2**d} x {2**d}, got {rho0.shape}")

    basis = build_fock_basis(lat.M, lat.N, max_states=max_states)
    h_bh = build_bh_hamiltonian(basis, lat.J, lat.U)
    _, gs = ground_state(h_bh)

    table = bit_table(d)
    hams = []
    qubit_energy = np.empty(2**d)
    for i in range(2**d):
        h_i, e_i = conditional_hamiltonian(h_bh, basis, table[i], model)
        hams.append(h_i)
        qubit_energy[i] = e_i

    psis = np.tile(gs, (2**d, 1))
    out = np.empty((len(times), 2**d, 2**d), dtype=complex)
    order = np.argsort(times)
    t_prev = 0.0
    for idx in order:
        t_cur = float(times[idx])
        dt = t_cur - t_prev
        if dt != 0.0:
            for b in range(2**d):
                psis[b] = propagate(
                    hams[b], psis[b], dt,
                    krylov_dim=krylov_dim, local_tol=local_tol, norm_tol=norm_tol,
                )
        norms = np.linalg.norm(psis, axis=1)
        if np.max(np.abs(norms - 1.0)) > norm_tol:
            raise PropagationError(
                f"conditional-state norm drift {np.max(np.abs(norms - 1.0)):.3e} at t={t_cur}"
            )
        overlaps = psis @ psis.conj().T  # [i, j] = <psi_j | psi_i>
        overlaps = 0.5 * (overlaps + overlaps.conj().T)
        np.fill_diagonal(overlaps, 1.0)  # populations are conserved exactly
        phases = np.exp(-1j * np.subtract.outer(qubit_energy, qubit_energy) * t_cur)
        out[idx] = phases * overlaps * rho0
        t_prev = t_cur
    return out


def exact_reduced_state(model: Model, rho0: np.ndarray, t: float, **kwargs) -> np.ndarray:
    """Reduced qubit state at a single time."""
    return exact_reduced_states(model, rho0, [t], **kwargs)[0]
