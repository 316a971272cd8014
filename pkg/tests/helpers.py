"""Shared generators for randomized tests."""

import numpy as np

from giantatoms.geometry import ConnectionPoint, Geometry


def random_geometry(rng, max_atoms=3, max_points=3, omega_scale=1.0, equal_gap=None):
    """Random open-waveguide geometry: N <= max_atoms, M_j <= max_points."""
    n = int(rng.integers(1, max_atoms + 1))
    atoms = [j for j in range(n) for _ in range(int(rng.integers(1, max_points + 1)))]
    rng.shuffle(atoms)
    pts = tuple(ConnectionPoint(a, float(rng.uniform(0.05, 2.0))) for a in atoms)
    if equal_gap is None:
        gaps = tuple(float(x) for x in rng.uniform(0, 4 * np.pi, len(atoms) - 1))
    else:
        gaps = (equal_gap,) * (len(atoms) - 1)
    omegas = tuple(float(x) for x in rng.normal(scale=omega_scale, size=n))
    return Geometry(omegas, pts, gap_phases=gaps)
