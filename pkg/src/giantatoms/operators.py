"""Dense multi-qubit operators and Lindblad building blocks.

Single-qubit basis is (|g>, |e>), so sigma_z = diag(-1, +1) and
sigma_minus = |g><e|.  Atom 0 is the leftmost tensor factor, i.e. the most
significant bit of a basis index.  hbar = 1 everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

MAX_ATOMS = 12

IDENTITY = np.eye(2, dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)
SIGMA_X = SIGMA_MINUS + SIGMA_PLUS
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)


class DimensionError(ValueError):
    """Operands live on Hilbert spaces of different dimension."""


def _check_cap(n_atoms, cap):
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    if n_atoms > cap:
        raise ValueError(
            f"2**{n_atoms} exceeds the dimension cap (at most {cap} atoms)")


def embed_qubit_op(local, atom_index, n_atoms, cap=MAX_ATOMS):
    """Embed a 2x2 operator into slot `atom_index` of an `n_atoms` register."""
    _check_cap(n_atoms, cap)
    if not 0 <= atom_index < n_atoms:
        raise IndexError(f"atom_index {atom_index} out of range for {n_atoms} atoms")
    local = np.asarray(local, dtype=complex)
    if local.shape != (2, 2):
        raise ValueError(f"local operator must be 2x2, got {local.shape}")
    left = np.eye(2 ** atom_index, dtype=complex)
    right = np.eye(2 ** (n_atoms - atom_index - 1), dtype=complex)
    return np.kron(np.kron(left, local), right)


@lru_cache(maxsize=256)
def _cached(name, j, n_atoms):
    op = embed_qubit_op({"-": SIGMA_MINUS, "+": SIGMA_PLUS, "z": SIGMA_Z}[name], j, n_atoms)
    op.flags.writeable = False
    return op


# the three below return shared read-only arrays
def sigma_minus(j, n_atoms):
    return _cached("-", j, n_atoms)


def sigma_plus(j, n_atoms):
    return _cached("+", j, n_atoms)


def sigma_z(j, n_atoms):
    return _cached("z", j, n_atoms)


def identity(n_atoms):
    return np.eye(2 ** n_atoms, dtype=complex)


def dag(a):
    return a.conj().T


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


def is_hermitian(a, atol=1e-12):
    return bool(np.max(np.abs(a - dag(a)), initial=0.0) <= atol)


def n_atoms_of(dim):
    """Number of qubits for a power-of-two dimension."""
    n = int(dim).bit_length() - 1
    if dim < 1 or 2 ** n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def _match(*ops):
    shapes = {op.shape for op in ops}
    if len(shapes) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(shapes)}")
    (shape,) = shapes
    if len(shape) != 2 or shape[0] != shape[1]:
        raise DimensionError(f"expected square matrices, got {shape}")


def lindblad_dissipator(L, rho):
    """D[L]rho = L rho L^+ - 1/2 {L^+ L, rho}."""
    L = np.asarray(L, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    _match(L, rho)
    LdL = dag(L) @ L
    return L @ rho @ dag(L) - 0.5 * (LdL @ rho + rho @ LdL)


def dissipator_cross(A, B, rho):
    """Cross term so that D[A+B] = D[A] + D[B] + dissipator_cross(A, B)."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    _match(A, B, rho)
    sym = dag(A) @ B + dag(B) @ A
    return A @ rho @ dag(B) + B @ rho @ dag(A) - 0.5 * (sym @ rho + rho @ sym)


def product_state(labels):
    """Density matrix of a product of |g>/|e> states, e.g. ``"eg"``."""
    if not labels:
        raise ValueError("empty product-state string")
    index = 0
    for ch in labels:
        if ch not in "ge":
            raise ValueError(f"product-state string may only contain 'g'/'e', got {labels!r}")
        index = 2 * index + (ch == "e")
    dim = 2 ** len(labels)
    rho = np.zeros((dim, dim), dtype=complex)
    rho[index, index] = 1.0
    return rho


def check_density_matrix(rho, trace_tol=1e-9, herm_tol=1e-10, pos_tol=1e-9):
    """Return a list of violated density-matrix invariants (empty if valid)."""
    problems = []
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        problems.append(f"trace {tr.real:.3e} differs from 1")
    if not is_hermitian(rho, herm_tol):
        problems.append("not Hermitian")
    else:
        lam = np.linalg.eigvalsh(0.5 * (rho + dag(rho)))[0]
        if lam < -pos_tol:
            problems.append(f"negative eigenvalue {lam:.3e}")
    return problems


def random_density_matrix(dim, rng, rank=None):
    """Random full-rank (or given rank) density matrix."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dag(g)
    return rho / np.trace(rho)


@dataclass(frozen=True, eq=False)
class MasterEquationGenerator:
    """rho' = -i[H, rho] + sum_j D[L_j] rho on a 2**N dimensional space."""

    H: np.ndarray
    jump_ops: tuple = field(default_factory=tuple)

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        jumps = tuple(np.asarray(L, dtype=complex) for L in self.jump_ops)
        _match(H, *jumps)
        n_atoms_of(H.shape[0])
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "jump_ops", jumps)

    @property
    def dim(self):
        return self.H.shape[0]

    @property
    def n_atoms(self):
        return n_atoms_of(self.dim)

    @cached_property
    def _jump_stack(self):
        if not self.jump_ops:
            return None
        L = np.stack(self.jump_ops)
        Ld = L.conj().transpose(0, 2, 1)
        return L, Ld, (Ld @ L).sum(axis=0)

    def rhs(self, rho):
        rho = np.asarray(rho, dtype=complex)
        _match(self.H, rho)
        out = -1j * commutator(self.H, rho)
        if self._jump_stack is not None:
            L, Ld, LdL = self._jump_stack
            out += (L @ rho @ Ld).sum(axis=0) - 0.5 * (LdL @ rho + rho @ LdL)
        return out

    def dissipative_part(self, rho):
        return self.rhs(rho) + 1j * commutator(self.H, rho)

    @cached_property
    def liouvillian(self):
        """Superoperator acting on row-major vec(rho)."""
        d = self.dim
        eye = np.eye(d, dtype=complex)
        # vec(A rho B) = kron(A, B^T) vec(rho) for row-major flattening
        sup = -1j * (np.kron(self.H, eye) - np.kron(eye, self.H.T))
        for L in self.jump_ops:
            LdL = dag(L) @ L
            sup += np.kron(L, L.conj())
            sup -= 0.5 * (np.kron(LdL, eye) + np.kron(eye, LdL.T))
        return sup

    def rate_scale(self):
        """max(||H||, sum_j ||L_j^+ L_j||) in the spectral norm."""
        h = np.linalg.norm(self.H, 2)
        d = sum(np.linalg.norm(dag(L) @ L, 2) for L in self.jump_ops)
        return max(h, d)

    def max_rate(self):
        """Decay scale sum_j ||L_j^+ L_j||, or 1 if it is numerically zero."""
        d = sum(np.linalg.norm(dag(L) @ L, 2) for L in self.jump_ops)
        return d if d > 1e-12 else 1.0
