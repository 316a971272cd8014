"""Atoms, connection points and waveguide phases.

A geometry is stored in one of two input modes, both reduced to a canonical
cumulative phase coordinate ``theta`` per connection point:

* coordinate mode: positions ``x`` plus a wavenumber ``k``; ``theta = k x``.
* phase mode: explicit gap phases between consecutive points; ``theta`` is
  their running sum starting from 0.

Phases are never reduced mod 2 pi.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    """Raised for a geometry that violates its invariants."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class ConnectionPoint:
    atom: int
    gamma: float
    coordinate: float | None = None


@dataclass(frozen=True)
class Geometry:
    """Giant atoms coupled to a 1D waveguide.

    `points` are listed in waveguide order (left to right).  Exactly one of
    `wavenumber` (with point coordinates) or `gap_phases` must be given.  With a
    mirror, `mirror` is the mirror coordinate in coordinate mode or the one-way
    phase from the mirror to the first point in phase mode; the mirror sits to
    the left of every point.
    """

    omegas: tuple
    points: tuple
    wavenumber: float | None = None
    gap_phases: tuple | None = None
    mirror: float | None = None
    velocity: float | None = None
    labels: tuple | None = None
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        object.__setattr__(self, "points", tuple(self.points))
        if self.gap_phases is not None:
            object.__setattr__(self, "gap_phases", tuple(float(p) for p in self.gap_phases))
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(default_label(j) for j in range(len(self.omegas))))
        else:
            object.__setattr__(self, "labels", tuple(self.labels))
        if not self.check:
            return
        report = validate_geometry(self)
        if report.errors:
            raise GeometryError(report.errors)

    @property
    def n_atoms(self):
        return len(self.omegas)

    @property
    def n_points(self):
        return len(self.points)

    @property
    def has_mirror(self):
        return self.mirror is not None

    def points_of(self, j):
        """Waveguide-order indices of atom j's connection points."""
        return [p for p, cp in enumerate(self.points) if cp.atom == j]

    def connection_counts(self):
        return [len(self.points_of(j)) for j in range(self.n_atoms)]

    def gammas(self):
        return np.array([cp.gamma for cp in self.points], dtype=float)

    def atom_indices(self):
        return np.array([cp.atom for cp in self.points], dtype=int)

    def theta(self):
        """Cumulative phase coordinate of every point."""
        if self.gap_phases is not None:
            return np.concatenate([[0.0], np.cumsum(self.gap_phases)])
        return self.wavenumber * np.array([cp.coordinate for cp in self.points], dtype=float)

    def mirror_phase(self):
        """One-way phase from the mirror to the first connection point."""
        if self.mirror is None:
            return None
        if self.gap_phases is not None:
            return float(self.mirror)
        return self.wavenumber * (self.points[0].coordinate - self.mirror)

    def total_phase(self):
        th = self.theta()
        return float(th[-1] - th[0])

    def order_string(self):
        """Connection-point order as atom labels, e.g. 'abab'."""
        return "".join(self.labels[cp.atom] if len(self.labels[cp.atom]) == 1
                       else f"[{self.labels[cp.atom]}]" for cp in self.points)

    def with_gap_phases(self, gap_phases, mirror=None):
        """Same atoms and rates in phase mode with new gaps."""
        pts = tuple(ConnectionPoint(cp.atom, cp.gamma) for cp in self.points)
        return Geometry(self.omegas, pts, gap_phases=tuple(gap_phases), mirror=mirror,
                        velocity=self.velocity, labels=self.labels)


def default_label(j):
    """a, b, ..., z, then a1, b1, ..."""
    letters = "abcdefghijklmnopqrstuvwxyz"
    q, r = divmod(j, len(letters))
    return letters[r] + (str(q) if q else "")


def from_order(order, gap_phases, gammas=1.0, omegas=None, mirror=None):
    """Phase-mode geometry from an order like ``"abab"`` (or a list of atom indices)."""
    if isinstance(order, str):
        labels = sorted(set(order), key=order.index)
        atoms = [labels.index(ch) for ch in order]
    else:
        atoms = list(order)
        labels = None
    n_atoms = max(atoms) + 1 if atoms else 0
    if np.isscalar(gap_phases):
        gap_phases = [gap_phases] * (len(atoms) - 1)
    if np.isscalar(gammas):
        gammas = [gammas] * len(atoms)
    omegas = [0.0] * n_atoms if omegas is None else omegas
    pts = tuple(ConnectionPoint(a, float(g)) for a, g in zip(atoms, gammas))
    return Geometry(tuple(omegas), pts, gap_phases=tuple(gap_phases), mirror=mirror,
                    labels=tuple(labels) if labels else None)


def from_positions(atoms, positions, gammas, wavenumber, omegas=None, mirror=None,
                   velocity=None, labels=None):
    """Coordinate-mode geometry; points are sorted by position."""
    order = np.argsort(positions, kind="stable")
    if np.isscalar(gammas):
        gammas = [gammas] * len(atoms)
    pts = tuple(ConnectionPoint(int(atoms[i]), float(gammas[i]), float(positions[i]))
                for i in order)
    n_atoms = max(atoms) + 1 if len(atoms) else 0
    omegas = [0.0] * n_atoms if omegas is None else omegas
    return Geometry(tuple(omegas), pts, wavenumber=wavenumber, mirror=mirror,
                    velocity=velocity, labels=labels)


def phase_table(geometry):
    """Symmetric matrix phi[p, q] of phases between connection points.

    phi[p, q] is the phase acquired travelling from the earlier of the two
    points to the later one.
    """
    th = geometry.theta()
    return np.abs(th[None, :] - th[:, None])


def phases_from_positions(geometry):
    return phase_table(geometry)


class Topology(enum.Enum):
    SEPARATE = "separate"
    BRAIDED = "braided"
    NESTED = "nested"


@dataclass(frozen=True)
class PairTopology:
    kind: Topology
    outer: int | None = None
    inner: int | None = None

    def __str__(self):
        if self.kind is Topology.NESTED:
            return f"nested(outer={self.outer}, inner={self.inner})"
        return self.kind.value


def _nested_in(inside, around):
    # all of `inside` strictly between two consecutive points of `around`
    for lo, hi in zip(around, around[1:]):
        if all(lo < p < hi for p in inside):
            return True
    return False


def classify_pair(geometry, j, k):
    """Separate, braided or nested, from the waveguide ordering of the points."""
    if j == k:
        raise ValueError("classify_pair needs two distinct atoms")
    pj, pk = geometry.points_of(j), geometry.points_of(k)
    if not pj or not pk:
        raise ValueError("both atoms need at least one connection point")
    if pj[-1] < pk[0] or pk[-1] < pj[0]:
        return PairTopology(Topology.SEPARATE)
    if _nested_in(pk, pj):
        return PairTopology(Topology.NESTED, outer=j, inner=k)
    if _nested_in(pj, pk):
        return PairTopology(Topology.NESTED, outer=k, inner=j)
    return PairTopology(Topology.BRAIDED)


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.errors


DETUNING_WARN_FACTOR = 10.0


def validate_geometry(geometry):
    """Collect invariant violations and warnings without raising.

    Build the geometry with ``check=False`` to inspect an invalid one.
    """
    rep = ValidationReport()
    try:
        _validate(geometry, rep)
    except (TypeError, ValueError, AttributeError) as exc:
        rep.errors.append(f"malformed geometry: {exc}")
    return rep


def _validate(geometry, rep):
    g = geometry
    n = len(g.omegas)
    if n == 0:
        rep.errors.append("no atoms")
        return
    if len(g.labels) != n:
        rep.errors.append(f"{len(g.labels)} labels for {n} atoms")
    elif len(set(g.labels)) != n:
        rep.errors.append("duplicate atom labels")
    for w in g.omegas:
        if not math.isfinite(w):
            rep.errors.append(f"non-finite atom frequency {w}")
    for i, cp in enumerate(g.points):
        if not 0 <= cp.atom < n:
            rep.errors.append(f"connection point {i} refers to unknown atom {cp.atom}")
        if not math.isfinite(cp.gamma) or cp.gamma < 0:
            rep.errors.append(f"connection point {i} has invalid gamma {cp.gamma}")
    counts = [sum(cp.atom == j for cp in g.points) for j in range(n)]
    for j, c in enumerate(counts):
        if c == 0:
            rep.errors.append(f"atom {g.labels[j] if j < len(g.labels) else j} has no connection points")

    if (g.wavenumber is None) == (g.gap_phases is None):
        rep.errors.append("specify exactly one of wavenumber or gap phases")
    elif g.gap_phases is not None:
        if len(g.gap_phases) != max(len(g.points) - 1, 0):
            rep.errors.append(
                f"{len(g.gap_phases)} gap phases for {len(g.points)} connection points")
        for ph in g.gap_phases:
            if not math.isfinite(ph) or ph < 0:
                rep.errors.append(f"gap phase {ph} must be finite and non-negative")
        if any(cp.coordinate is not None for cp in g.points):
            rep.errors.append("coordinates given together with gap phases")
        if g.mirror is not None and (not math.isfinite(g.mirror) or g.mirror < 0):
            rep.errors.append(f"mirror phase {g.mirror} must be finite and non-negative")
    else:
        if not math.isfinite(g.wavenumber) or g.wavenumber <= 0:
            rep.errors.append(f"wavenumber must be positive, got {g.wavenumber}")
        xs = [cp.coordinate for cp in g.points]
        if any(x is None or not math.isfinite(x) for x in xs):
            rep.errors.append("every connection point needs a finite coordinate")
        else:
            for a, b in zip(xs, xs[1:]):
                if b == a:
                    rep.errors.append(f"coincident connection points at x = {a}")
                elif b < a:
                    rep.errors.append("connection points not sorted by coordinate")
            if g.mirror is not None and xs and not g.mirror < xs[0]:
                rep.errors.append("mirror must lie left of every connection point")

    if g.mirror is not None and not rep.errors:
        if n != 2 or counts != [1, 1]:
            rep.errors.append("mirror is supported only for two small atoms")

    if not rep.errors and n > 1:
        det = max(g.omegas) - min(g.omegas)
        # (sum_n sqrt(gamma_jn))^2 bounds Gamma_j from above
        scale = max(sum(math.sqrt(cp.gamma) for cp in g.points if cp.atom == j) ** 2
                    for j in range(n))
        if scale > 0 and det > DETUNING_WARN_FACTOR * scale:
            rep.warnings.append(
                f"max detuning {det:g} exceeds {DETUNING_WARN_FACTOR:g}x the largest decay "
                f"scale {scale:g}; waveguide-mediated exchange is negligible in this regime")
    return rep


class Setup(enum.Enum):
    """The five two-atom configurations compared in the coefficient table."""

    SMALL_ATOMS = "small"
    SMALL_ATOMS_MIRROR = "mirror"
    SEPARATE = "separate"
    BRAIDED = "braided"
    NESTED = "nested"

    @classmethod
    def parse(cls, name):
        key = name.strip().lower().replace("_", "-")
        aliases = {"small": cls.SMALL_ATOMS, "small-atoms": cls.SMALL_ATOMS, "ab": cls.SMALL_ATOMS,
                   "mirror": cls.SMALL_ATOMS_MIRROR, "small-atoms-mirror": cls.SMALL_ATOMS_MIRROR,
                   "separate": cls.SEPARATE, "aabb": cls.SEPARATE,
                   "braided": cls.BRAIDED, "abab": cls.BRAIDED,
                   "nested": cls.NESTED, "abba": cls.NESTED}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown setup {name!r}") from None


SETUP_ORDERS = {
    Setup.SMALL_ATOMS: "ab",
    Setup.SMALL_ATOMS_MIRROR: "ab",
    Setup.SEPARATE: "aabb",
    Setup.BRAIDED: "abab",
    Setup.NESTED: "abba",
}


def two_atom_setup(setup, phi, gamma=1.0, omegas=(0.0, 0.0)):
    """Equal-rate, equal-gap geometry for one of the five two-atom setups.

    For the mirror setup `phi` is the round-trip phase between atom a and the
    mirror (and also the a-b gap), so the mirror sits phi/2 left of atom a.
    """
    setup = Setup.parse(setup) if isinstance(setup, str) else setup
    mirror = phi / 2 if setup is Setup.SMALL_ATOMS_MIRROR else None
    return from_order(SETUP_ORDERS[setup], phi, gamma, omegas=omegas, mirror=mirror)
