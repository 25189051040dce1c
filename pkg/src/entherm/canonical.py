"""Canonical-ensemble thermodynamics of an isolated subsystem."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .eigensolver import DenseSpectrum

DEGENERACY_RTOL = 1e-10


@dataclass(frozen=True)
class CanonicalCurve:
    betas: np.ndarray
    entropies: np.ndarray
    energies: np.ndarray
    log_z: np.ndarray

    @property
    def temperatures(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.0 / self.betas


@dataclass(frozen=True)
class GibbsState:
    beta: float
    weights: np.ndarray  # Boltzmann weight of each eigenvector, ascending energy
    spectrum: DenseSpectrum

    @property
    def rho(self) -> np.ndarray:
        v = self.spectrum.eigenvectors
        return (v * self.weights) @ v.T

    @property
    def log_z(self) -> float:
        return _log_z(self.spectrum.eigenvalues, self.beta)

    @property
    def energy(self) -> float:
        return float(self.weights @ self.spectrum.eigenvalues)

    @property
    def entropy(self) -> float:
        w = self.weights[self.weights > 0]
        return float(-np.sum(w * np.log(w)))


def default_betas(t_min: float = 0.01, t_max: float = 100.0, n: int = 400) -> np.ndarray:
    """Inverse temperatures of a geometric temperature grid, descending beta."""
    return 1.0 / np.geomspace(t_min, t_max, n)


def ground_degeneracy(eigenvalues: np.ndarray) -> int:
    e = np.asarray(eigenvalues)
    scale = max(1.0, float(np.max(np.abs(e))))
    return int(np.sum(e - e[0] <= DEGENERACY_RTOL * scale))


def _log_z(eps: np.ndarray, beta: float) -> float:
    if np.isinf(beta):
        return -np.inf
    return float(-beta * eps[0] + logsumexp(-beta * (eps - eps[0])))


def boltzmann_weights(eigenvalues: np.ndarray, beta: float) -> np.ndarray:
    """Normalized ``exp(-beta e_n)``, shifted by the ground level; ``beta=inf`` allowed."""
    if not beta >= 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    eps = np.asarray(eigenvalues, dtype=np.float64)
    if np.isinf(beta):
        g = ground_degeneracy(eps)
        w = np.zeros_like(eps)
        w[:g] = 1.0 / g
        return w
    x = -beta * (eps - eps[0])
    w = np.exp(x - logsumexp(x))
    return w


def canonical_curve(spectrum: DenseSpectrum | np.ndarray, betas) -> CanonicalCurve:
    eps = spectrum.eigenvalues if isinstance(spectrum, DenseSpectrum) else np.asarray(spectrum)
    betas = np.atleast_1d(np.asarray(betas, dtype=np.float64))
    if np.any(betas < 0) or np.any(np.isnan(betas)):
        raise ValueError("betas must be non-negative")
    s = np.empty_like(betas)
    e = np.empty_like(betas)
    lz = np.empty_like(betas)
    g = ground_degeneracy(eps)
    for k, beta in enumerate(betas):
        if np.isinf(beta):
            e[k] = eps[0]
            s[k] = np.log(g)
            lz[k] = -np.inf
            continue
        x = -beta * (eps - eps[0])
        shifted = logsumexp(x)
        w = np.exp(x - shifted)
        e[k] = w @ eps
        lz[k] = -beta * eps[0] + shifted
        # S = beta E + ln Z with the ground-level shift cancelled analytically
        s[k] = beta * (e[k] - eps[0]) + shifted
    return CanonicalCurve(betas, s, e, lz)


def gibbs_state(spectrum: DenseSpectrum, beta: float) -> GibbsState:
    return GibbsState(float(beta), boltzmann_weights(spectrum.eigenvalues, beta), spectrum)
