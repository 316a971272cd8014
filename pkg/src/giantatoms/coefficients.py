"""Closed-form master-equation coefficients for giant atoms.

For connection points j_n with bare rates gamma_{j_n} and pairwise phases
phi_{j_n,k_m}:

    delta_omega_j   = sum_{n<m} sqrt(g_jn g_jm) sin phi_{jn,jm}
    g_{j,k}         = sum_{n,m} sqrt(g_jn g_km) / 2 sin phi_{jn,km}
    Gamma_j         = sum_{n,m} sqrt(g_jn g_jm) cos phi_{jn,jm}
    Gamma_coll,j,k  = sum_{n,m} sqrt(g_jn g_km) cos phi_{jn,km}

A semi-infinite waveguide is handled by unfolding: every point gets a mirror
image, and each real/image point carries half the bare rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ConnectionPoint, Geometry, Setup, phase_table
from .operators import (MasterEquationGenerator, anticommutator, commutator, dag,
                        sigma_minus, sigma_plus, sigma_z)


def unfold_mirror(geometry):
    """Open-waveguide equivalent of a mirror geometry (image points, half rates)."""
    if not geometry.has_mirror:
        return geometry
    th = geometry.theta()
    u = geometry.mirror_phase() + (th - th[0])  # phase distance from the mirror
    pts = list(geometry.points)
    images = [ConnectionPoint(cp.atom, cp.gamma / 2) for cp in reversed(pts)]
    reals = [ConnectionPoint(cp.atom, cp.gamma / 2) for cp in pts]
    pos = np.concatenate([-u[::-1], u])
    return Geometry(geometry.omegas, tuple(images + reals), gap_phases=tuple(np.diff(pos)),
                    labels=geometry.labels)


def _open(geometry):
    return unfold_mirror(geometry) if geometry.has_mirror else geometry


def _pairs(geometry, j, k):
    g = _open(geometry)
    phi = phase_table(g)
    gam = g.gammas()
    for n in g.points_of(j):
        for m in g.points_of(k):
            yield n, m, np.sqrt(gam[n] * gam[m]), phi[n, m]


def lamb_shift(geometry, j):
    g = _open(geometry)
    pts = g.points_of(j)
    phi = phase_table(g)
    gam = g.gammas()
    total = 0.0
    for a, n in enumerate(pts):
        for m in pts[a + 1:]:
            total += np.sqrt(gam[n] * gam[m]) * np.sin(phi[n, m])
    return float(total)


def exchange_coupling(geometry, j, k):
    if j == k:
        raise ValueError("exchange coupling needs two distinct atoms")
    return float(sum(w / 2 * np.sin(p) for _, _, w, p in _pairs(geometry, j, k)))


def collective_decay(geometry, j, k):
    if j == k:
        raise ValueError("collective decay needs two distinct atoms; use individual_decay")
    return float(sum(w * np.cos(p) for _, _, w, p in _pairs(geometry, j, k)))


def individual_decay(geometry, j):
    """Gamma_j as the squared modulus |sum_n sqrt(gamma_jn) e^{i phi_{j1,jn}}|^2."""
    g = _open(geometry)
    pts = g.points_of(j)
    th = g.theta()
    gam = g.gammas()
    amp = sum(np.sqrt(gam[n]) * np.exp(1j * (th[n] - th[pts[0]])) for n in pts)
    return float(abs(amp) ** 2)


def individual_decay_double_sum(geometry, j):
    return float(sum(w * np.cos(p) for _, _, w, p in _pairs(geometry, j, j)))


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """Coefficients of the N-atom master equation.

    gamma_coll holds Gamma_j on its diagonal, so it is the full decay matrix.
    """

    omega: np.ndarray
    delta_omega: np.ndarray
    g: np.ndarray
    gamma_coll: np.ndarray

    @property
    def n_atoms(self):
        return len(self.delta_omega)

    @property
    def omega_prime(self):
        return self.omega + self.delta_omega

    @property
    def gamma_ind(self):
        return np.diag(self.gamma_coll).copy()

    def decay_matrix(self):
        return self.gamma_coll

    def hamiltonian(self):
        n = self.n_atoms
        H = sum(self.omega_prime[j] * sigma_z(j, n) / 2 for j in range(n))
        H = H + np.zeros((2 ** n, 2 ** n), dtype=complex)
        for j in range(n):
            for k in range(j + 1, n):
                if self.g[j, k] != 0:
                    sm_j, sm_k = sigma_minus(j, n), sigma_minus(k, n)
                    H += self.g[j, k] * (sm_j @ dag(sm_k) + dag(sm_j) @ sm_k)
        return H

    def rhs(self, rho):
        """Apply the master equation term by term, exactly as written."""
        n = self.n_atoms
        sm = [sigma_minus(j, n) for j in range(n)]
        sp = [sigma_plus(j, n) for j in range(n)]
        out = -1j * commutator(self.hamiltonian(), rho)
        for j in range(n):
            G = self.gamma_coll[j, j]
            out += G * (sm[j] @ rho @ sp[j] - 0.5 * anticommutator(sp[j] @ sm[j], rho))
        for j in range(n):
            for k in range(j + 1, n):
                G = self.gamma_coll[j, k]
                term = sm[j] @ rho @ sp[k] - 0.5 * anticommutator(sp[j] @ sm[k], rho)
                out += G * (term + dag(term))
        return out

    def generator(self):
        """Equivalent Lindblad form with jumps from the decay-matrix eigenbasis."""
        n = self.n_atoms
        lam, vec = np.linalg.eigh(self.gamma_coll)
        scale = max(np.max(np.abs(lam), initial=0.0), 1.0)
        sm = [sigma_minus(j, n) for j in range(n)]
        jumps = []
        for a in range(n):
            if lam[a] > 1e-15 * scale:
                jumps.append(np.sqrt(lam[a]) * sum(vec[j, a] * sm[j] for j in range(n)))
        return MasterEquationGenerator(self.hamiltonian(), tuple(jumps))


def coefficient_set(geometry):
    """All coefficients at once, vectorised over connection-point pairs."""
    g = _open(geometry)
    phi = phase_table(g)
    gam = g.gammas()
    w = np.sqrt(np.outer(gam, gam))
    A = np.zeros((g.n_points, g.n_atoms))
    A[np.arange(g.n_points), g.atom_indices()] = 1.0
    cos_part = A.T @ (w * np.cos(phi)) @ A
    sin_part = A.T @ (w * np.sin(phi)) @ A
    # diagonal of sin_part counts each same-atom pair twice
    delta = np.diag(sin_part) / 2
    coupling = sin_part / 2
    np.fill_diagonal(coupling, 0.0)
    decay = 0.5 * (cos_part + cos_part.T)
    return CoefficientSet(np.array(geometry.omegas, dtype=float), delta, coupling, decay)


def _two_atom_set(dw, g, Ga, Gb, Gc, omegas=(0.0, 0.0)):
    return CoefficientSet(np.array(omegas, dtype=float), np.array(dw, dtype=float),
                          np.array([[0.0, g], [g, 0.0]]), np.array([[Ga, Gc], [Gc, Gb]]))


def two_atom_closed_form(setup, phi, gamma=1.0, omegas=(0.0, 0.0)):
    """Closed-form coefficients for equal rates and equal gap phases."""
    setup = Setup.parse(setup) if isinstance(setup, str) else setup
    s, c = np.sin, np.cos
    y = gamma
    if setup is Setup.SMALL_ATOMS:
        row = ((0.0, 0.0), y / 2 * s(phi), y, y, y * c(phi))
    elif setup is Setup.SMALL_ATOMS_MIRROR:
        row = ((y / 2 * s(phi), y / 2 * s(3 * phi)), y / 2 * (s(phi) + s(2 * phi)),
               y * (1 + c(phi)), y * (1 + c(3 * phi)), y * (c(phi) + c(2 * phi)))
    elif setup is Setup.SEPARATE:
        row = ((y * s(phi), y * s(phi)), y / 2 * (s(phi) + 2 * s(2 * phi) + s(3 * phi)),
               2 * y * (1 + c(phi)), 2 * y * (1 + c(phi)),
               y * (c(phi) + 2 * c(2 * phi) + c(3 * phi)))
    elif setup is Setup.BRAIDED:
        row = ((y * s(2 * phi), y * s(2 * phi)), y / 2 * (3 * s(phi) + s(3 * phi)),
               2 * y * (1 + c(2 * phi)), 2 * y * (1 + c(2 * phi)),
               y * (3 * c(phi) + c(3 * phi)))
    elif setup is Setup.NESTED:
        row = ((y * s(3 * phi), y * s(phi)), y * (s(phi) + s(2 * phi)),
               2 * y * (1 + c(3 * phi)), 2 * y * (1 + c(phi)), 2 * y * (c(phi) + c(2 * phi)))
    else:  # pragma: no cover
        raise ValueError(setup)
    return _two_atom_set(*row, omegas=omegas)


def decay_matrix_min_eigenvalue(coeffs):
    return float(np.linalg.eigvalsh(coeffs.gamma_coll)[0])


def check_coefficient_set(coeffs, rel_tol=1e-10):
    """Invariant violations of a coefficient set (empty list when fine)."""
    problems = []
    G = coeffs.gamma_coll
    scale = max(float(np.max(np.abs(G), initial=0.0)), 1e-300)
    if np.any(np.diag(G) < -rel_tol * scale):
        problems.append("negative individual decay")
    if not np.allclose(G, G.T, atol=1e-14 * scale, rtol=0):
        problems.append("decay matrix not symmetric")
    if not np.allclose(coeffs.g, coeffs.g.T, rtol=0, atol=1e-14 * scale):
        problems.append("coupling matrix not symmetric")
    if decay_matrix_min_eigenvalue(coeffs) < -rel_tol * scale:
        problems.append("decay matrix not positive semidefinite")
    return problems

