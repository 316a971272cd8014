"""SLH networks for giant-atom geometries, their master equations and scattering.

Every connection point couples to both propagation directions with amplitude
sqrt(gamma/2).  Right-moving components are cascaded left to right and carry
the atomic Hamiltonians; left-moving components are cascaded right to left.
Port 0 is the right-moving channel, port 1 the left-moving one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientSet
from .operators import MasterEquationGenerator, sigma_minus, sigma_plus, sigma_z
from .simulator import DegenerateSteadyStateError, NumericalError, evolve, steady_state
from .slh import (attach_drive, component, concatenate, drive_output_offsets, phase_shift,
                  series_chain)


class UnsupportedGeometryError(ValueError):
    pass


def _point_components(geometry):
    """Per-point (right, left) components; omega sits on each atom's first point."""
    n = geometry.n_atoms
    d = 2 ** n
    seen = set()
    right, left = [], []
    for cp in geometry.points:
        L = np.sqrt(cp.gamma / 2) * sigma_minus(cp.atom, n)
        H = None
        if cp.atom not in seen:
            seen.add(cp.atom)
            H = geometry.omegas[cp.atom] * sigma_z(cp.atom, n) / 2
        right.append(component(L, H))
        left.append(component(L))
    return right, left, d


def _gaps(geometry):
    return np.diff(geometry.theta())


def build_waveguide_slh(geometry):
    """Two-port triplet of an open waveguide with any number of giant atoms."""
    if geometry.has_mirror:
        raise UnsupportedGeometryError(
            "geometry has a mirror; use build_semi_infinite_slh")
    right, left, d = _point_components(geometry)
    gaps = _gaps(geometry)
    r_chain, l_chain = [right[0]], [left[-1]]
    for p, gap in enumerate(gaps):
        r_chain = [right[p + 1], phase_shift(gap, d)] + r_chain
        q = len(gaps) - 1 - p
        l_chain = [left[q], phase_shift(gaps[q], d)] + l_chain
    return concatenate(series_chain(*r_chain), series_chain(*l_chain))


def build_semi_infinite_slh(geometry):
    """One-port triplet for two small atoms in front of a mirror.

    The field first passes b and a moving towards the mirror, picks up the
    round-trip phase between a and the mirror, then passes a and b again.
    """
    if not geometry.has_mirror:
        raise UnsupportedGeometryError("geometry has no mirror; use build_waveguide_slh")
    if geometry.n_atoms != 2 or geometry.connection_counts() != [1, 1]:
        raise UnsupportedGeometryError("mirror is supported only for two small atoms")
    right, left, d = _point_components(geometry)
    (gap,) = _gaps(geometry)
    round_trip = 2 * geometry.mirror_phase()
    return series_chain(right[1], phase_shift(gap, d), right[0], phase_shift(round_trip, d),
                        left[0], phase_shift(gap, d), left[1])


def build_slh(geometry):
    if geometry.has_mirror:
        return build_semi_infinite_slh(geometry)
    return build_waveguide_slh(geometry)


def derive_master_equation(geometry):
    """Master-equation generator read off the composed SLH network."""
    g = build_slh(geometry)
    return MasterEquationGenerator(g.H, tuple(g.L))


def coefficients_from_triplet(triplet, omegas, rtol=1e-9):
    """Project a composed triplet onto the giant-atom master-equation form.

    Reads omega_j' from the sigma_z parts of H, g_{j,k} from its exchange
    parts, and the decay matrix as sum_p c_pj conj(c_pk) where
    L_p = sum_j c_pj sigma_-^(j).  Raises ValueError if H or L contain anything
    outside that form.
    """
    d = triplet.dim
    n = len(omegas)
    if d != 2 ** n:
        raise ValueError(f"triplet dimension {d} does not match {n} atoms")
    H = triplet.H
    sm = [sigma_minus(j, n) for j in range(n)]
    sp = [sigma_plus(j, n) for j in range(n)]
    omega_p = np.array([2 * np.trace(H @ sigma_z(j, n)).real / d for j in range(n)])
    g = np.zeros((n, n))
    for j in range(n):
        for k in range(j + 1, n):
            # H contains g (X + X^+) with X = s_-^j s_+^k and tr(X X^+) = d/4
            val = 4 * np.trace(H @ sp[j] @ sm[k]) / d
            g[j, k] = g[k, j] = val.real
    c = np.array([[2 * np.trace(Lp @ sp[j]) / d for j in range(n)] for Lp in triplet.L])
    c = c.reshape(triplet.n_ports, n)
    M = c.T @ c.conj()

    model = CoefficientSet(np.asarray(omegas, float), omega_p - np.asarray(omegas, float), g,
                           M.real)
    scale = max(1.0, float(np.max(np.abs(H), initial=0.0)), float(np.max(np.abs(M), initial=0.0)))
    bad_h = np.max(np.abs(H - model.hamiltonian()), initial=0.0)
    bad_l = max((np.max(np.abs(Lp - sum(c[p, j] * sm[j] for j in range(n))))
                 for p, Lp in enumerate(triplet.L)), default=0.0)
    bad_m = np.max(np.abs(M.imag), initial=0.0)
    if max(bad_h, bad_l, bad_m) > rtol * scale:
        raise ValueError(
            f"triplet is not of giant-atom form (H residual {bad_h:.2e}, "
            f"L residual {bad_l:.2e}, imaginary decay {bad_m:.2e})")
    return model


def slh_coefficients(geometry):
    """CoefficientSet derived through the SLH network rather than closed forms."""
    return coefficients_from_triplet(build_slh(geometry), geometry.omegas)


@dataclass(frozen=True)
class ScatteringResult:
    t: complex
    r: complex
    omega_d: float
    method: str = "null-space"

    @property
    def transmittance(self):
        return abs(self.t) ** 2

    @property
    def reflectance(self):
        return abs(self.r) ** 2


RELAX_TIMES = 50.0


def driven_steady_state(gen):
    """Steady state, falling back to long integration from the ground state.

    A degenerate null space occurs whenever part of the system is dark; the
    ground state then relaxes to the physically selected steady state.
    """
    try:
        return steady_state(gen), "null-space"
    except DegenerateSteadyStateError:
        pass
    d = gen.dim
    rho0 = np.zeros((d, d), dtype=complex)
    rho0[0, 0] = 1.0
    traj = evolve(rho0, gen, RELAX_TIMES / gen.max_rate(), store_states=False,
                  record_every=10 ** 9)
    rho = traj.final_state
    residual = np.max(np.abs(gen.rhs(rho)))
    if residual > 1e-6 * max(gen.rate_scale(), 1.0):
        raise NumericalError(
            f"no steady state found: degenerate null space and residual {residual:.2e} "
            "after long-time integration")
    return rho, "integration"


def transmission_reflection(geometry, drive):
    """Amplitude transmission and reflection for a coherent probe from the left."""
    if geometry.has_mirror:
        raise UnsupportedGeometryError("transmission is defined for an open waveguide only")
    if drive.port != 0:
        raise ValueError("the probe must enter from the left (port 0)")
    if drive.alpha == 0:
        raise ValueError("probe amplitude alpha must be non-zero")
    g = build_waveguide_slh(geometry)
    driven = attach_drive(g, drive)
    gen = MasterEquationGenerator(driven.H, tuple(driven.L))
    rho, method = driven_steady_state(gen)
    c = drive_output_offsets(g, drive)
    out = [c[p] + np.trace(driven.L[p] @ rho) for p in range(2)]
    return ScatteringResult(complex(out[0] / drive.alpha), complex(out[1] / drive.alpha),
                            float(drive.omega_d), method)

