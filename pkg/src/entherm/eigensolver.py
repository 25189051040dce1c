"""Lanczos ground states with full reorthogonalization, and dense spectra."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000
DEFAULT_DEGENERACY_TOL = 1e-8
# Krylov vectors kept before an explicit restart from the current Ritz vector
DEFAULT_KRYLOV_SIZE = 300


class DegenerateGroundStateWarning(UserWarning):
    pass


class LanczosNotConverged(RuntimeError):
    def __init__(self, message: str, result: "GroundStateResult"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class GroundStateResult:
    energy: float
    vector: np.ndarray
    residual_norm: float
    gap_estimate: float
    degenerate: bool
    iterations: int
    converged: bool = True


@dataclass(frozen=True)
class DenseSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def _start_vector(dim: int, seed: int, deflate: np.ndarray | None = None) -> np.ndarray:
    v = np.random.default_rng(seed).uniform(-1.0, 1.0, dim)
    if deflate is not None:
        v -= deflate @ (deflate.T @ v)
        v -= deflate @ (deflate.T @ v)
    return v / np.linalg.norm(v)


def _lanczos_lowest(apply_h, v0, tol, max_iter, krylov_size, deflate=None):
    """Lowest eigenpair of H restricted to the complement of ``deflate``.

    Returns ``(energy, vector, residual, second_ritz, iterations)``.
    ``second_ritz`` is the second-lowest Ritz value of the final Krylov
    space (``inf`` when the space is one-dimensional).
    """
    dim = v0.shape[0]

    def project(w):
        if deflate is not None:
            w -= deflate @ (deflate.T @ w)
        return w

    total = 0
    v = v0
    best = (np.inf, v0, np.inf, np.inf)
    while True:
        m_max = min(krylov_size, dim, max_iter - total + 1)
        V = np.empty((m_max, dim))
        alpha = np.empty(m_max)
        beta = np.empty(m_max)
        V[0] = v
        m = 0
        ritz_res = np.inf
        for m in range(m_max):
            w = project(apply_h(V[m]))
            total += 1
            alpha[m] = V[m] @ w
            # two passes of classical Gram-Schmidt against the whole basis
            w -= V[: m + 1].T @ (V[: m + 1] @ w)
            w -= V[: m + 1].T @ (V[: m + 1] @ w)
            project(w)
            beta[m] = np.linalg.norm(w)
            theta, y = eigh_tridiagonal(alpha[: m + 1], beta[:m], select="i", select_range=(0, 0))
            ritz_res = abs(beta[m] * y[-1, 0])
            scale = max(1.0, abs(theta[0]))
            if ritz_res < 0.1 * tol or beta[m] < 1e-14 * scale or m + 1 == m_max or total >= max_iter:
                break
            V[m + 1] = w / beta[m]
        k = m + 1
        evals, evecs = eigh_tridiagonal(alpha[:k], beta[: k - 1])
        energy = evals[0]
        vec = V[:k].T @ evecs[:, 0]
        vec = project(vec)
        vec /= np.linalg.norm(vec)
        residual = np.linalg.norm(project(apply_h(vec)) - energy * vec)
        second = evals[1] if k > 1 else np.inf
        if residual < best[2]:
            best = (energy, vec, residual, second)
        krylov_exhausted = beta[m] < 1e-14 * max(1.0, abs(energy))
        if residual <= tol or krylov_exhausted or total >= max_iter:
            return best[0], best[1], best[2], best[3], total
        v = vec


def lanczos_ground_state(
    apply_h: Callable[[np.ndarray], np.ndarray],
    dim: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
    krylov_size: int = DEFAULT_KRYLOV_SIZE,
    gap: str = "deflate",
) -> GroundStateResult:
    """Ground state of a real symmetric operator given only its matvec.

    ``gap`` selects how ``gap_estimate`` is obtained.  ``"ritz"`` uses the
    second Ritz value of the ground-state run, which cannot see an exactly
    degenerate partner of the ground state (a single start vector has one
    component per eigenspace).  ``"deflate"`` (default) runs a second,
    loosely converged Lanczos on the orthogonal complement of the ground
    vector, so a degenerate ground space shows up as a vanishing gap.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if gap not in ("deflate", "ritz"):
        raise ValueError("gap must be 'deflate' or 'ritz'")

    v0 = _start_vector(dim, seed)
    energy, vec, residual, second, iters = _lanczos_lowest(apply_h, v0, tol, max_iter, krylov_size)
    gap_estimate = second - energy
    if gap == "deflate" and dim > 1:
        basis = vec[:, None]
        w0 = _start_vector(dim, seed + 1, basis)
        e1, _, _, _, it1 = _lanczos_lowest(
            apply_h, w0, max(tol, 1e-6), max_iter, krylov_size, deflate=basis
        )
        gap_estimate = e1 - energy
        iters += it1
    elif dim == 1:
        gap_estimate = np.inf

    degenerate = bool(gap_estimate < degeneracy_tol)
    converged = bool(residual <= tol)
    result = GroundStateResult(float(energy), vec, float(residual), float(gap_estimate), degenerate, iters, converged)
    if not converged:
        raise LanczosNotConverged(
            f"Lanczos residual {residual:.3e} > tol {tol:.1e} after {iters} matvecs", result
        )
    if degenerate:
        warnings.warn(
            f"ground state looks degenerate (gap estimate {gap_estimate:.3e} < {degeneracy_tol:.1e}); "
            "the reduced density matrix is not uniquely defined",
            DegenerateGroundStateWarning,
            stacklevel=2,
        )
    return result


def full_spectrum(matrix: np.ndarray, symmetry_tol: float = 1e-12) -> DenseSpectrum:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
    if matrix.size and np.max(np.abs(matrix - matrix.T)) > symmetry_tol * scale:
        raise ValueError("matrix is not symmetric")
    w, v = np.linalg.eigh(matrix)
    return DenseSpectrum(w, v)
