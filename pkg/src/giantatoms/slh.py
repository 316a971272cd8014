"""SLH triplets with scalar scattering matrices and their composition rules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import DimensionError, dag, n_atoms_of, sigma_z

FEEDBACK_TOL = 1e-12


class SingularFeedbackError(ValueError):
    pass


def _drop_constant(H):
    d = H.shape[0]
    H = 0.5 * (H + dag(H))
    return H - (np.trace(H).real / d) * np.eye(d)


@dataclass(frozen=True, eq=False)
class SlhTriplet:
    """Open system with `n_ports` field channels.

    S is an n x n complex matrix of plain numbers (propagation phases here),
    L has shape (n, d, d) and H is a d x d Hermitian operator.
    """

    S: np.ndarray
    L: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionError(f"H must be square, got shape {H.shape}")
        d = H.shape[0]
        S = np.asarray(self.S, dtype=complex)
        if S.ndim < 2:
            S = S.reshape(-1, 1) if S.size else np.zeros((0, 0), dtype=complex)
        n = S.shape[0]
        if S.shape != (n, n):
            raise ValueError(f"S must be square, got shape {S.shape}")
        L = np.asarray(self.L, dtype=complex)
        if L.size == 0 and n == 0:
            L = np.zeros((0, d, d), dtype=complex)
        if L.ndim == 2 and n == 1:
            L = L[None]
        if L.shape != (n, d, d):
            raise DimensionError(
                f"L must have shape {(n, d, d)} to match S and H, got {L.shape}")
        absH = np.abs(H)
        scale = max(1.0, absH.max()) if d else 1.0
        if d and np.abs(H - H.conj().T).max() > 1e-12 * scale:
            raise ValueError("H is not Hermitian")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "H", H)

    @property
    def n_ports(self):
        return self.S.shape[0]

    @property
    def dim(self):
        return self.H.shape[0]

    def is_unitary(self, atol=1e-10):
        n = self.n_ports
        return bool(np.allclose(self.S @ dag(self.S), np.eye(n), atol=atol, rtol=0))

    def __repr__(self):
        return f"SlhTriplet(n_ports={self.n_ports}, dim={self.dim})"


def component(gamma_half_op, H=None, n_ports=1):
    """Single-channel triplet (1, L, H) used for one connection point."""
    d = gamma_half_op.shape[0]
    H = np.zeros((d, d), dtype=complex) if H is None else H
    return SlhTriplet(np.eye(n_ports), np.asarray(gamma_half_op)[None], H)


def phase_shift(phi, dim, n_ports=1):
    """Pure propagation (e^{i phi}, 0, 0) on every port."""
    S = np.exp(1j * phi) * np.eye(n_ports)
    return SlhTriplet(S, np.zeros((n_ports, dim, dim)), np.zeros((dim, dim)))


def identity_triplet(n_ports, dim):
    return SlhTriplet(np.eye(n_ports), np.zeros((n_ports, dim, dim)), np.zeros((dim, dim)))


def coherent_source(alpha, dim):
    """G_alpha = (1, alpha, 0) in the rotating frame of the drive."""
    return SlhTriplet(np.eye(1), alpha * np.eye(dim)[None], np.zeros((dim, dim)))


def _same_dim(g1, g2):
    if g1.dim != g2.dim:
        raise DimensionError(f"Hilbert dimensions differ: {g1.dim} vs {g2.dim}")


def series(g2, g1):
    """Series product g2 <| g1: outputs of g1 feed the inputs of g2."""
    _same_dim(g1, g2)
    if g1.n_ports != g2.n_ports:
        raise ValueError(f"port counts differ: {g2.n_ports} vs {g1.n_ports}")
    S = g2.S @ g1.S
    S2L1 = np.einsum("pq,qij->pij", g2.S, g1.L)
    L = S2L1 + g2.L
    # L2^+ S2 L1 summed over ports
    X = np.einsum("pji,pjk->ik", g2.L.conj(), S2L1)
    H = g1.H + g2.H + (X - dag(X)) / 2j
    return SlhTriplet(S, L, _drop_constant(H))


def series_chain(*triplets):
    """series_chain(gN, ..., g2, g1) == gN <| ... <| g2 <| g1."""
    result = triplets[-1]
    for g in reversed(triplets[:-1]):
        result = series(g, result)
    return result


def concatenate(g1, g2):
    """Concatenation product g1 [+] g2 (parallel, block-diagonal S)."""
    _same_dim(g1, g2)
    n1, n2 = g1.n_ports, g2.n_ports
    S = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    S[:n1, :n1] = g1.S
    S[n1:, n1:] = g2.S
    L = np.concatenate([g1.L, g2.L], axis=0)
    return SlhTriplet(S, L, _drop_constant(g1.H + g2.H))


def feedback(g, out_port, in_port):
    """Feed output `out_port` back into input `in_port` (0-based ports)."""
    n = g.n_ports
    j, k = out_port, in_port
    if not (0 <= j < n and 0 <= k < n):
        raise IndexError(f"ports ({j}, {k}) out of range for {n}-port triplet")
    if j == k:
        raise ValueError("feedback requires distinct output and input ports")
    denom = 1 - g.S[j, k]
    if abs(denom) < FEEDBACK_TOL:
        raise SingularFeedbackError(f"singular feedback: 1 - S[{j},{k}] = {denom}")
    inv = 1 / denom
    rows = [p for p in range(n) if p != j]
    cols = [q for q in range(n) if q != k]
    S_col_k = g.S[rows, k]
    S_new = g.S[np.ix_(rows, cols)] + inv * np.outer(S_col_k, g.S[j, cols])
    L_new = g.L[rows] + inv * S_col_k[:, None, None] * g.L[j][None]
    # L^+ S_{:k} (1 - S_jk)^-1 L_j
    X = inv * np.einsum("pba,p,bc->ac", g.L.conj(), g.S[:, k], g.L[j])
    H = g.H + (X - dag(X)) / 2j
    return SlhTriplet(S_new, L_new, _drop_constant(H))


def master_equation_from_triplet(g):
    """Return (H, jump_ops) with rho' = -i[H, rho] + sum_j D[L_j] rho."""
    return g.H.copy(), [L.copy() for L in g.L]


@dataclass(frozen=True)
class DriveSpec:
    """Coherent tone with |alpha|^2 photons per unit time at omega_d into `port`."""

    alpha: complex
    omega_d: float = 0.0
    port: int = 0


def drive_output_offsets(g, drive):
    """c-number part S[:, port] * alpha that the drive adds to each output."""
    if not 0 <= drive.port < g.n_ports:
        raise IndexError(f"drive port {drive.port} invalid for {g.n_ports}-port triplet")
    return g.S[:, drive.port] * drive.alpha


def attach_drive(g, drive):
    """Drive port `drive.port` of `g` and move to the frame rotating at omega_d.

    The series composition with the coherent source leaves c-number offsets in
    the output operators.  These are folded into the Hamiltonian, so the
    returned triplet carries the full driven Hamiltonian and drive-free jump
    operators; its master equation is the driven one.  The offsets themselves
    are available from :func:`drive_output_offsets`.
    """
    n, d = g.n_ports, g.dim
    if not 0 <= drive.port < n:
        raise IndexError(f"drive port {drive.port} invalid for {n}-port triplet")
    source = identity_triplet(n, d)
    L_src = source.L.copy()
    L_src[drive.port] = drive.alpha * np.eye(d)
    driven = series(g, SlhTriplet(source.S, L_src, source.H))

    c = drive_output_offsets(g, drive)
    L = driven.L - c[:, None, None] * np.eye(d)[None]
    X = np.einsum("p,pji->ij", c, L.conj())  # sum_p c_p L_p^+
    H = driven.H + (X - dag(X)) / 2j

    n_atoms = n_atoms_of(d)
    H = H - drive.omega_d * sum(sigma_z(j, n_atoms) for j in range(n_atoms)) / 2
    return SlhTriplet(driven.S, L, _drop_constant(H))
