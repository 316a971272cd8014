"""Time evolution, steady states and expectation values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .operators import DimensionError, dag

STABILITY_BOUND = 0.1
NULL_SPACE_RTOL = 1e-10
SUPEROPERATOR_MAX_DIM = 16
STEADY_STATE_MAX_DIM = 32
RATE_FLOOR = 1e-12


class StabilityError(ValueError):
    pass


class NumericalError(ArithmeticError):
    pass


class DegenerateSteadyStateError(NumericalError):
    """The Liouvillian null space is not one-dimensional."""

    def __init__(self, null_dim):
        self.null_dim = null_dim
        super().__init__(f"degenerate null space: dimension {null_dim}")


@dataclass
class Trajectory:
    times: np.ndarray
    states: list = field(default_factory=list)
    observables: dict = field(default_factory=dict)
    trace_drift: float = 0.0
    final_state: np.ndarray | None = None


def expectation(rho, op):
    rho = np.asarray(rho)
    op = np.asarray(op)
    if rho.shape != op.shape:
        raise DimensionError(f"dimension mismatch: {op.shape} vs {rho.shape}")
    return complex(np.trace(op @ rho))


def purity(rho):
    return float(np.real(np.trace(rho @ rho)))


def default_dt(gen):
    scale = gen.rate_scale()
    return 1e-3 / scale if scale > RATE_FLOOR else 1e-3


def _measure(name, obs, rho):
    if callable(obs):
        return float(obs(rho))
    return float(np.real(np.trace(obs @ rho)))


def evolve(rho0, gen, t_final, dt=None, observables=None, store_states=True, record_every=1):
    """Fixed-step RK4 integration of the master equation.

    The step count is ceil(t_final / dt); dt is shrunk slightly so the last
    step lands on t_final.  After each step rho is re-Hermitised.  Raises
    StabilityError when dt * max(||H||, sum ||L^+ L||) exceeds 0.1.
    """
    rho = np.array(rho0, dtype=complex)
    d = gen.dim
    if rho.shape != (d, d):
        raise DimensionError(f"rho0 has shape {rho.shape}, generator dimension is {d}")
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(gen.H))
            and all(np.all(np.isfinite(L)) for L in gen.jump_ops)):
        raise NumericalError("non-finite values in the initial state or generator")
    dt = default_dt(gen) if dt is None else float(dt)
    if dt <= 0:
        raise ValueError("dt must be positive")
    scale = gen.rate_scale()
    if dt * scale > STABILITY_BOUND:
        raise StabilityError(
            f"dt = {dt:g} violates the stability guard: dt * {scale:g} = {dt * scale:g} > "
            f"{STABILITY_BOUND}; use dt <= {STABILITY_BOUND / scale:g}")
    n_steps = max(int(math.ceil(t_final / dt - 1e-9)), 0) if t_final > 0 else 0
    h = t_final / n_steps if n_steps else 0.0
    observables = observables or {}

    if d <= SUPEROPERATOR_MAX_DIM:
        # the RK4 update of a linear ODE is the degree-4 Taylor polynomial of e^{hL}
        A = h * gen.liouvillian
        eye = np.eye(d * d, dtype=complex)
        term = eye
        prop = eye.copy()
        for k in range(1, 5):
            term = term @ A / k
            prop = prop + term

        def step(r):
            return (prop @ r.reshape(-1)).reshape(d, d)
    else:
        def step(r):
            k1 = gen.rhs(r)
            k2 = gen.rhs(r + 0.5 * h * k1)
            k3 = gen.rhs(r + 0.5 * h * k2)
            k4 = gen.rhs(r + h * k3)
            return r + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    times, states = [], []
    series = {name: [] for name in observables}
    tr0 = np.trace(rho).real
    drift = 0.0

    def record(i, r):
        times.append(i * h)
        if store_states:
            states.append(r.copy())
        for name, obs in observables.items():
            series[name].append(_measure(name, obs, r))

    record(0, rho)
    for i in range(1, n_steps + 1):
        rho = step(rho)
        rho = 0.5 * (rho + dag(rho))
        if not np.all(np.isfinite(rho)):
            raise NumericalError(f"non-finite density matrix at t = {i * h:g}")
        drift = max(drift, abs(np.trace(rho).real - tr0))
        if i % record_every == 0 or i == n_steps:
            record(i, rho)
    return Trajectory(np.array(times), states,
                      {k: np.array(v) for k, v in series.items()}, drift, rho)


def steady_state(gen, rtol=NULL_SPACE_RTOL):
    """Unique steady state from the null space of the vectorised Liouvillian."""
    d = gen.dim
    if d > STEADY_STATE_MAX_DIM:
        raise ValueError(f"steady_state supports at most {STEADY_STATE_MAX_DIM} dimensions, got {d}")
    _, s, vh = np.linalg.svd(gen.liouvillian)
    null_dim = int(np.sum(s <= rtol * s[0])) if s[0] > 0 else d * d
    if null_dim != 1:
        raise DegenerateSteadyStateError(null_dim)
    rho = vh[-1].conj().reshape(d, d)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + dag(rho))
    residual = np.max(np.abs(gen.rhs(rho)))
    if residual > 1e-9 * max(gen.rate_scale(), 1.0):
        raise NumericalError(f"steady-state residual {residual:.3e} too large")
    return rho
