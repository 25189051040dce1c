"""Reduced density matrices of the layer bipartition and their entropies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import HeisenbergOperator, StateVector

CLAMP_TOL = 1e-14
NEGATIVE_TOL = 1e-8


@dataclass(frozen=True)
class EntanglementReport:
    lam: float
    s_a: float
    e_a: float
    e_b: float


def _split(state: StateVector, n_a: int):
    n = state.basis.n_sites
    if not 0 < n_a < n:
        raise ValueError(f"n_a={n_a} is not a proper cut of a {n}-site basis")
    states = state.basis.states
    a = states & ((1 << n_a) - 1)
    b = states >> n_a
    return a, b, n - n_a


def amplitude_matrix(state: StateVector, n_a: int) -> np.ndarray:
    """``C[a, b]`` with A on the low ``n_a`` bits and B on the rest."""
    a, b, n_b = _split(state, n_a)
    c = np.zeros((1 << n_a, 1 << n_b))
    c[a, b] = state.amplitudes
    return c


def _gram_by_sector(c: np.ndarray, n_left: int, n_up: int) -> np.ndarray:
    """``c @ c.T`` computed one left-popcount block at a time.

    ``c[l, r]`` is nonzero only when popcount(l) + popcount(r) == n_up,
    so the product is block diagonal in popcount(l).
    """
    left = np.arange(c.shape[0], dtype=np.int64)
    right = np.arange(c.shape[1], dtype=np.int64)
    pl = np.bitwise_count(left)
    pr = np.bitwise_count(right)
    rho = np.zeros((c.shape[0], c.shape[0]))
    for k in range(n_left + 1):
        rows = np.flatnonzero(pl == k)
        cols = np.flatnonzero(pr == n_up - k)
        if rows.size == 0 or cols.size == 0:
            continue
        ck = c[np.ix_(rows, cols)]
        rho[np.ix_(rows, rows)] = ck @ ck.T
    return rho


def reduced_density_matrix(state: StateVector, n_a: int) -> np.ndarray:
    """``rho_A = Tr_B |psi><psi| = C C^T``."""
    c = amplitude_matrix(state, n_a)
    return _gram_by_sector(c, n_a, state.basis.n_up)


def reduced_density_matrix_b(state: StateVector, n_a: int) -> np.ndarray:
    """``rho_B = Tr_A |psi><psi| = C^T C``, indexed by B's local configuration."""
    c = amplitude_matrix(state, n_a)
    return _gram_by_sector(c.T, state.basis.n_sites - n_a, state.basis.n_up)


def check_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.max(np.abs(rho - rho.T)) > tol:
        raise ValueError("density matrix is not symmetric")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix trace {np.trace(rho)!r} != 1")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise ValueError("density matrix is not positive semidefinite")


def _probabilities(rho: np.ndarray) -> np.ndarray:
    p = np.linalg.eigvalsh(rho)
    if p.size and p[0] < -NEGATIVE_TOL:
        raise ValueError(f"non-physical density matrix: eigenvalue {p[0]:.3e}")
    return p


def entropy_from_probabilities(p: np.ndarray, clamp_tol: float = CLAMP_TOL) -> float:
    p = np.asarray(p, dtype=np.float64)
    p = p[p > clamp_tol]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(rho: np.ndarray, clamp_tol: float = CLAMP_TOL) -> float:
    return entropy_from_probabilities(_probabilities(rho), clamp_tol)


def entanglement_spectrum(rho: np.ndarray, clamp_tol: float = CLAMP_TOL) -> np.ndarray:
    """Ascending eigenvalues of ``-ln rho``; clamped levels are ``+inf``."""
    p = _probabilities(rho)[::-1]
    levels = np.full(p.shape, np.inf)
    keep = p > clamp_tol
    levels[keep] = -np.log(p[keep])
    return levels


def subsystem_energy(rho: np.ndarray, h: np.ndarray) -> float:
    """``Tr[rho H]``."""
    if rho.shape != h.shape:
        raise ValueError(f"shape mismatch: rho {rho.shape} vs H {h.shape}")
    return float(np.einsum("ij,ji->", rho, h))


def expectation(op: HeisenbergOperator, state: StateVector) -> float:
    """``<psi|H|psi>`` on the full coupled state (cross-check for Tr[rho H])."""
    v = state.amplitudes
    return float(v @ op.apply(state.basis, v))


def schmidt_weights(state: StateVector, n_a: int) -> np.ndarray:
    """Descending Schmidt weights (squared singular values of C)."""
    s = np.linalg.svd(amplitude_matrix(state, n_a), compute_uv=False)
    return s**2


def sz_table(n_sites: int) -> np.ndarray:
    """``Sz[c, i]`` = +-1/2 for configuration ``c`` and site ``i``."""
    c = np.arange(1 << n_sites, dtype=np.int64)[:, None]
    return ((c >> np.arange(n_sites)) & 1) - 0.5
