"""Inverse design of decoherence-free giant-atom networks.

Each designed atom has two connection points with equal rates, so its decay
vanishes exactly when the phase between its points is an odd multiple of pi.
The remaining freedom sets the exchange couplings.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .coefficients import coefficient_set
from .geometry import Topology, classify_pair, from_order

DECAY_TOL = 1e-12
COUPLING_TOL = 1e-12


class InfeasibleDesignError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DesignSolution:
    gap_phases: tuple
    geometry: object
    couplings: np.ndarray
    residual: dict
    feasible: bool
    targets: np.ndarray | None = None

    def summary(self):
        r = self.residual
        return (f"{'feasible' if self.feasible else 'INFEASIBLE'}: max Gamma_j = {r['max_gamma']:.3g}, "
                f"max |Gamma_coll| = {r['max_gamma_coll']:.3g}, "
                f"max coupling error = {r['max_coupling_error']:.3g}")


def _nonneg_odd_pi(rest):
    """Smallest (2n+1) pi - rest that is non-negative, n >= 0."""
    val = math.pi - rest
    if val < 0:
        val += 2 * math.pi * math.ceil(-val / (2 * math.pi))
    return val


def _principal_phase(ratio):
    phi = math.asin(ratio)
    return phi + 2 * math.pi if phi < 0 else phi


def _gammas(gammas, n):
    g = [float(gammas)] * n if np.isscalar(gammas) else [float(x) for x in gammas]
    if len(g) != n:
        raise ValueError(f"{len(g)} rates for {n} atoms")
    if any(not x > 0 for x in g):
        raise ValueError("atom rates must be positive")
    return g


def _finish(order, gap_phases, gammas, targets, mask=None, omegas=None):
    point_gammas = [gammas[a] for a in order]
    n = len(gammas)
    geom = from_order(order, gap_phases, point_gammas, omegas=omegas or [0.0] * n)
    cs = coefficient_set(geom)
    gamma_ref = max(gammas)
    decay = cs.gamma_coll
    off = decay - np.diag(np.diag(decay))
    err = 0.0
    if targets is not None:
        diff = np.abs(cs.g - targets)
        if mask is not None:
            diff = diff[mask]
        err = float(np.max(diff, initial=0.0))
    residual = {"max_gamma": float(np.max(np.abs(np.diag(decay)))),
                "max_gamma_coll": float(np.max(np.abs(off), initial=0.0)),
                "max_coupling_error": err}
    feasible = (residual["max_gamma"] < DECAY_TOL * gamma_ref
                and residual["max_gamma_coll"] < DECAY_TOL * gamma_ref
                and err < COUPLING_TOL * gamma_ref)
    return DesignSolution(tuple(gap_phases), geom, cs.g, residual, feasible, targets)


def chain_order(n_atoms):
    """Point order 0 1 0 2 1 3 2 ... (N-1) (N-2) (N-1) of the braided chain."""
    order = [0, 1]
    for j in range(2, n_atoms):
        order += [j - 2, j]
    order += [n_atoms - 2, n_atoms - 1]
    return order


def design_chain(n_atoms, gammas, targets, omegas=None):
    """Braided chain with nearest-neighbour couplings `targets` and no decay.

    Even gaps fix the couplings, g_{j,j+1} = sqrt(gamma_j gamma_{j+1}) sin phi_2j;
    odd gaps close every atom's loop to an odd multiple of pi.
    """
    if n_atoms < 2:
        raise ValueError("a chain needs at least two atoms")
    gam = _gammas(gammas, n_atoms)
    targets = [float(t) for t in targets]
    if len(targets) != n_atoms - 1:
        raise ValueError(f"need {n_atoms - 1} nearest-neighbour targets, got {len(targets)}")
    phases = [0.0] * (2 * n_atoms - 1)  # phases[i] is phi_{i+1}
    for j, target in enumerate(targets):
        bound = math.sqrt(gam[j] * gam[j + 1])
        if abs(target) > bound:
            raise InfeasibleDesignError(
                f"unachievable coupling: |g_{j + 1},{j + 2}| = {abs(target):g} exceeds "
                f"sqrt(gamma_{j + 1} gamma_{j + 2}) = {bound:g}")
        phases[2 * j + 1] = _principal_phase(target / bound)
    phases[0] = _nonneg_odd_pi(phases[1])
    for j in range(1, n_atoms - 1):
        phases[2 * j] = _nonneg_odd_pi(phases[2 * j - 1] + phases[2 * j + 1])
    phases[-1] = _nonneg_odd_pi(phases[-2])

    want = np.zeros((n_atoms, n_atoms))
    for j, target in enumerate(targets):
        want[j, j + 1] = want[j + 1, j] = target
    return _finish(chain_order(n_atoms), phases, gam, want, omegas=omegas)


class SignPattern(enum.Enum):
    ALL_EQUAL = "all-equal"
    ONE_FLIPPED = "one-flipped"

    @classmethod
    def parse(cls, name):
        key = name.strip().lower().replace("_", "-")
        for p in cls:
            if p.value == key or p.name.lower().replace("_", "-") == key:
                return p
        raise ValueError(f"unknown sign pattern {name!r} (use all-equal or one-flipped)")


def all_to_all_3_couplings(gammas, phi2, phi3, phi4):
    g1, g2, g3 = gammas
    return (math.sqrt(g1 * g2) * math.sin(phi2 + phi3),
            math.sqrt(g1 * g3) * math.sin(phi3),
            math.sqrt(g2 * g3) * math.sin(phi3 + phi4))


def design_all_to_all_3_free(gammas, phi2, phi3, omegas=None):
    """Three-atom all-to-all design from its two free phases.

    Points are ordered 1 2 3 1 2 3, which leaves 5 gaps and 3 zero-decay
    constraints.  phi4 follows from phi2 and phi3, and the outer gaps phi1,
    phi5 from the constraints of atoms 1 and 3.  Three couplings therefore
    cannot be set independently.
    """
    gam = _gammas(gammas, 3)
    if phi2 < 0 or phi3 < 0:
        raise ValueError("gap phases must be non-negative")
    phi4 = _nonneg_odd_pi(phi2 + phi3)
    phi1 = _nonneg_odd_pi(phi2 + phi3)
    phi5 = _nonneg_odd_pi(phi3 + phi4)
    phases = [phi1, phi2, phi3, phi4, phi5]
    g12, g13, g23 = all_to_all_3_couplings(gam, phi2, phi3, phi4)
    want = np.array([[0, g12, g13], [g12, 0, g23], [g13, g23, 0]])
    return _finish([0, 1, 2, 0, 1, 2], phases, gam, want, omegas=omegas)


def design_all_to_all_3(gammas, pattern=SignPattern.ALL_EQUAL, omegas=None):
    """Equal-magnitude all-to-all couplings between three atoms.

    ALL_EQUAL uses phi2 = phi3 = phi4 = pi/3, giving (sqrt(3)/2) gamma on every
    pair; ONE_FLIPPED uses phi2 = phi4 = 4 pi/3, phi3 = pi/3, which flips the
    sign of g12 and g23 relative to g13.
    """
    pattern = SignPattern.parse(pattern) if isinstance(pattern, str) else pattern
    gam = _gammas(gammas, 3)
    if pattern is SignPattern.ALL_EQUAL:
        if not (gam[0] == gam[1] == gam[2]):
            raise InfeasibleDesignError("the all-equal pattern needs equal atom rates")
        return design_all_to_all_3_free(gam, math.pi / 3, math.pi / 3, omegas)
    return design_all_to_all_3_free(gam, 4 * math.pi / 3, math.pi / 3, omegas)


def _all_to_all_phases(free, n):
    # free = phi_2 .. phi_N; atom j's loop spans gaps phi_j .. phi_{j+N-1}
    phases = [0.0] + [float(x) % (2 * math.pi) for x in free]
    phases[0] = _nonneg_odd_pi(sum(phases[1:n]))
    for k in range(1, n):
        phases.append(_nonneg_odd_pi(sum(phases[k:k + n - 1])))
    return phases


def design_all_to_all(n_atoms, gammas, targets, seed=0, restarts=16, tol=1e-9):
    """Best-effort least-squares all-to-all design for N atoms (order 1..N 1..N).

    The N - 1 free gaps are fitted to the N(N-1)/2 targets; the rest follow
    from the zero-decay constraints, so decay always vanishes.  The solution
    is flagged feasible only when every target is met within tol * gamma_ref.
    """
    if n_atoms < 2:
        raise ValueError("need at least two atoms")
    gam = _gammas(gammas, n_atoms)
    want = np.asarray(targets, dtype=float)
    if want.shape != (n_atoms, n_atoms):
        raise ValueError(f"targets must be a {n_atoms}x{n_atoms} matrix")
    want = 0.5 * (want + want.T)
    iu = np.triu_indices(n_atoms, 1)
    order = list(range(n_atoms)) * 2
    point_gammas = [gam[a] for a in order]

    def resid(free):
        geom = from_order(order, _all_to_all_phases(free, n_atoms), point_gammas)
        return (coefficient_set(geom).g - want)[iu]

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        x0 = rng.uniform(0, 2 * math.pi, n_atoms - 1)
        fit = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if best is None or fit.cost < best.cost:
            best = fit
        if best.cost < 1e-30:
            break
    sol = _finish(order, _all_to_all_phases(best.x, n_atoms), gam, want,
                  mask=np.triu(np.ones((n_atoms, n_atoms), bool), 1))
    ok = (sol.residual["max_gamma"] < DECAY_TOL * max(gam)
          and sol.residual["max_gamma_coll"] < DECAY_TOL * max(gam)
          and sol.residual["max_coupling_error"] < tol * max(gam))
    return DesignSolution(sol.gap_phases, sol.geometry, sol.couplings, sol.residual, ok, want)


@dataclass
class DecoherenceReport:
    gamma: np.ndarray
    gamma_coll: np.ndarray
    g: np.ndarray
    topology: dict = field(default_factory=dict)
    protected_pairs: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    def lines(self, labels):
        out = []
        for j, k in self.protected_pairs:
            out.append(f"protected {labels[j]}-{labels[k]}: g = {float(self.g[j, k])!r} "
                       f"({self.topology[(j, k)]})")
        for j, k in self.violations:
            out.append(f"theorem violation {labels[j]}-{labels[k]}: {self.topology[(j, k)]}")
        return out


def verify_decoherence_free(geometry, tol=DECAY_TOL):
    """Find pairs with protected exchange: |g| above and all decay below tol * gamma_ref.

    A protected pair that is not braided is recorded under `violations`.
    """
    cs = coefficient_set(geometry)
    gamma_ref = float(max(geometry.gammas().max(initial=0.0), 1e-300))
    cut = tol * gamma_ref
    G = cs.gamma_coll
    rep = DecoherenceReport(np.diag(G).copy(), G.copy(), cs.g.copy())
    n = geometry.n_atoms
    for j in range(n):
        for k in range(j + 1, n):
            topo = classify_pair(geometry, j, k)
            rep.topology[(j, k)] = topo
            quiet = abs(G[j, j]) < cut and abs(G[k, k]) < cut and abs(G[j, k]) < cut
            if quiet and abs(cs.g[j, k]) > cut:
                rep.protected_pairs.append((j, k))
                if topo.kind is not Topology.BRAIDED:
                    rep.violations.append((j, k))
    return rep
