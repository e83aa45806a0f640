"""Independent brute-force references used across the test suite.

Everything here deliberately avoids the package's production code paths:
dense matrix exponentials, explicit tensor products and plain mode sums.
"""

import numpy as np
import scipy.linalg as sla

from coldbell.exact import build_bh_hamiltonian, build_fock_basis, ground_state
from coldbell.states import bit_table


def dense_reference_reduced_state(model, rho0, t):
    """Evolve the full qubit x gas tensor product with a dense expm and trace
    out the gas.  Feasible only for tiny (M, N, d)."""
    lat = model.lattice
    imp = model.impurities
    d = imp.d
    basis = build_fock_basis(lat.M, lat.N)
    dim = basis.size
    h_bh = build_bh_hamiltonian(basis, lat.J, lat.U).toarray()
    _, gs = ground_state(build_bh_hamiltonian(basis, lat.J, lat.U))

    qubit_dim = 2**d
    table = bit_table(d)
    h_total = np.kron(np.eye(qubit_dim), h_bh).astype(complex)
    for idx in range(qubit_dim):
        proj = np.zeros((qubit_dim, qubit_dim))
        proj[idx, idx] = 1.0
        qubit_energy = 0.5 * imp.omega0 * float(np.sum(2 * table[idx] - 1))
        h_total += qubit_energy * np.kron(proj, np.eye(dim))
        for j in range(d):
            if table[idx][j] == 1:
                site_occ = np.diag(basis.states[:, imp.sites[j] - 1].astype(float))
                h_total += imp.eta * np.kron(proj, site_occ)

    rho_full = np.kron(np.asarray(rho0, dtype=complex), np.outer(gs, gs.conj()))
    u_full = sla.expm(-1j * h_total * t)
    rho_t = u_full @ rho_full @ u_full.conj().T
    return np.einsum("iaja->ij", rho_t.reshape(qubit_dim, dim, qubit_dim, dim))


def mode_sum_gamma(model, i, j, t):
    """Direct evaluation of the dephasing sum, written independently of the
    package's vectorised implementation."""
    lat = model.lattice
    imp = model.impurities
    total = 0.0
    for m in range(1, lat.M):
        k = 2.0 * np.pi * m / (lat.M * lat.a)
        eps = 4.0 * lat.J * np.sin(k * lat.a / 2.0) ** 2
        omega = np.sqrt(eps**2 + 2.0 * lat.U * lat.n0 * eps)
        nu = 2.0 * imp.eta**2 * lat.n0 * eps / (omega**3 * lat.M)
        structure = sum(
            (i[m_] - j[m_]) * np.exp(1j * k * lat.a * imp.sites[m_]) for m_ in range(imp.d)
        )
        total += nu * np.sin(omega * t / 2.0) ** 2 * abs(structure) ** 2
    return total


def riemann_gamma_continuum(cfg, i, j, t, sites, n_points=400_001):
    """Midpoint Riemann evaluation of the continuum dephasing integral."""
    q = np.linspace(cfg.q0, 0.5, n_points)
    q = 0.5 * (q[1:] + q[:-1])
    dq = (0.5 - cfg.q0) / (n_points - 1)
    eps = 4.0 * cfg.J * np.sin(np.pi * q) ** 2
    omega = np.sqrt(eps**2 + 2.0 * cfg.U * cfg.n0 * eps)
    delta = np.asarray(i, dtype=float) - np.asarray(j, dtype=float)
    structure = np.abs(np.exp(2j * np.pi * np.outer(q, np.asarray(sites, float))) @ delta) ** 2
    integrand = eps / omega**3 * np.sin(0.5 * omega * t) ** 2 * structure
    return 4.0 * cfg.eta**2 * cfg.n0 * float(np.sum(integrand) * dq)


def random_density(d, rng, pure=False):
    """Haar-ish random d-qubit density matrix."""
    n = 2**d
    if pure:
        ket = rng.normal(size=n) + 1j * rng.normal(size=n)
        ket /= np.linalg.norm(ket)
        return np.outer(ket, ket.conj())
    raw = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = raw @ raw.conj().T
    return rho / rho.trace()
