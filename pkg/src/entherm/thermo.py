"""Reduced state vs canonical ensemble along a lambda sweep.

The effective inverse temperature is the central difference
``B_A(lam) = [S_A(lam+d) - S_A(lam-d)] / [E_A(lam+d) - E_A(lam-d)]`` and the
comparison at each interior point uses the Gibbs state of ``H_A`` at that
``B_A``.
"""

from __future__ import annotations

import math
import os
import warnings
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import xlogy

from .canonical import boltzmann_weights, canonical_curve, gibbs_state, GibbsState
from .eigensolver import (
    DEFAULT_DEGENERACY_TOL,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    DenseSpectrum,
    full_spectrum,
    lanczos_ground_state,
)
from .entanglement import (
    CLAMP_TOL,
    reduced_density_matrix,
    reduced_density_matrix_b,
    subsystem_energy,
    sz_table,
    von_neumann_entropy,
)
from .hamiltonian import CoupledSystem, StateVector
from .lattice import chain_distance

DE_GUARD = 1e-12
FIDELITY_NEG_TOL = 1e-10
SUPPORT_TOL = 1e-14
PROBE_LAMBDAS = (10.0, 100.0, 1000.0)


class SupportWarning(RuntimeWarning):
    """rho0 vanishes where rho1 has weight, so D(rho1|rho0) is infinite."""


# ---------------------------------------------------------------------------
# per-point ground state data

@dataclass(frozen=True)
class SolverSettings:
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    seed: int = 0
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL
    force: bool = False

    def __post_init__(self):
        if not (self.tol > 0 and self.degeneracy_tol > 0 and self.max_iter > 0):
            raise ValueError("solver tolerances and max_iter must be positive")


@dataclass(frozen=True)
class SweepPoint:
    lam: float
    s_a: float
    e_a: float
    e_b: float
    energy: float = math.nan
    residual: float = math.nan
    gap: float = math.nan
    degenerate: bool = False
    error: str | None = None
    rho_a: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return self.error is None and math.isfinite(self.s_a)


def _failed(lam: float, msg: str, **kw) -> SweepPoint:
    return SweepPoint(lam, math.nan, math.nan, math.nan, error=msg, **kw)


def solve_point(system: CoupledSystem, lam: float, settings: SolverSettings = SolverSettings()) -> SweepPoint:
    """One Lanczos solve and the layer-A entanglement data at ``lam``.

    Failures are returned as a point carrying ``error`` instead of raising,
    so a sweep can continue past them.
    """
    try:
        basis = system.basis
        op = system.operator(lam)
        res = lanczos_ground_state(
            op.linear_operator(basis),
            basis.dim,
            tol=settings.tol,
            max_iter=settings.max_iter,
            seed=settings.seed,
            degeneracy_tol=settings.degeneracy_tol * system.model.j_a,
        )
    except Exception as exc:  # recorded per point, never fatal for the sweep
        return _failed(lam, f"{type(exc).__name__}: {exc}")
    meta = dict(energy=res.energy, residual=res.residual_norm, gap=res.gap_estimate, degenerate=res.degenerate)
    if res.degenerate and not settings.force:
        return SweepPoint(lam, math.nan, math.nan, math.nan, **meta)
    try:
        n_a = system.model.n_a
        psi = StateVector(basis, res.vector)
        rho = reduced_density_matrix(psi, n_a)
        rho_b = reduced_density_matrix_b(psi, n_a)
        return SweepPoint(
            lam,
            von_neumann_entropy(rho),
            subsystem_energy(rho, system.h_a),
            subsystem_energy(rho_b, system.h_b),
            rho_a=rho,
            **meta,
        )
    except Exception as exc:
        return _failed(lam, f"{type(exc).__name__}: {exc}", **meta)


def worker_count() -> int:
    raw = os.environ.get("ENTHERM_THREADS", "").strip()
    return max(1, int(raw)) if raw else 1


def _ordered_map(fn, items: Iterable, workers: int) -> Iterator:
    """``map`` that runs up to ``workers`` calls at once but yields in input order."""
    if workers <= 1:
        yield from map(fn, items)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        pending: deque = deque()
        for x in items:
            pending.append(pool.submit(fn, x))
            if len(pending) >= 2 * workers:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()


def iter_sweep(system, lambdas, settings=SolverSettings(), workers=None) -> Iterator[SweepPoint]:
    workers = worker_count() if workers is None else workers
    return _ordered_map(lambda lam: solve_point(system, float(lam), settings), lambdas, workers)


def lambda_sweep(system, lambdas, settings=SolverSettings(), workers=None, keep_rho=False) -> list[SweepPoint]:
    """All grid points, in grid order.  Density matrices are dropped unless ``keep_rho``."""
    out = []
    for p in iter_sweep(system, lambdas, settings, workers):
        out.append(p if keep_rho else replace(p, rho_a=None))
    return out


def lambda_grid(lambda_max: float, delta: float, lambda_min: float = 0.0) -> np.ndarray:
    if not delta > 0:
        raise ValueError("delta_lambda must be positive")
    n = int(round((lambda_max - lambda_min) / delta))
    # rounding keeps grid values such as 4.02 free of accumulated binary noise
    return np.round(lambda_min + delta * np.arange(n + 1), 12)


# ---------------------------------------------------------------------------
# effective temperature

def central_difference_beta(s_minus, s_plus, e_minus, e_plus) -> float:
    de = e_plus - e_minus
    if not abs(de) >= DE_GUARD:
        return math.nan
    return (s_plus - s_minus) / de


def effective_beta(sweep: Sequence[SweepPoint], delta_lambda: float, energy: str = "e_a") -> np.ndarray:
    """B(lam) by central differences on a uniform grid; NaN where undefined.

    Endpoints are undefined, as are points whose neighbours failed or whose
    energy difference is below 1e-12.  ``energy="e_b"`` pairs S_A with E_B,
    which gives layer B's inverse temperature since S_B = S_A.
    """
    if len(sweep) < 3:
        raise ValueError("need at least three sweep points")
    lams = np.array([p.lam for p in sweep])
    if not np.allclose(np.diff(lams), delta_lambda, rtol=1e-9, atol=1e-12):
        raise ValueError("sweep spacing does not equal delta_lambda")
    s = np.array([p.s_a for p in sweep])
    e = np.array([getattr(p, energy) for p in sweep])
    b = np.full(len(sweep), np.nan)
    for k in range(1, len(sweep) - 1):
        b[k] = central_difference_beta(s[k - 1], s[k + 1], e[k - 1], e[k + 1])
    return b


def temperature(beta: float) -> float:
    if math.isnan(beta):
        return math.nan
    if beta == 0.0:
        return math.inf
    return 1.0 / beta


# ---------------------------------------------------------------------------
# distances between density matrices

def _psd_eigh(rho: np.ndarray, tol: float, what: str):
    p, u = np.linalg.eigh(rho)
    if p.size and p[0] < -tol:
        raise ValueError(f"{what} has eigenvalue {p[0]:.3e} below -{tol:g}")
    return np.clip(p, 0.0, None), u


def _is_diagonal(a: np.ndarray) -> bool:
    return a.ndim == 1 or not np.any(a - np.diag(np.diagonal(a)))


def relative_entropy(rho1: np.ndarray, rho0: np.ndarray, support_tol: float = SUPPORT_TOL) -> float:
    """``D(rho1|rho0) = Tr rho1 ln rho1 - Tr rho1 ln rho0`` (``inf`` off support).

    1-D inputs are read as diagonal density matrices.
    """
    rho1, rho0 = np.asarray(rho1, float), np.asarray(rho0, float)
    if _is_diagonal(rho1) and _is_diagonal(rho0):
        p = rho1 if rho1.ndim == 1 else np.diagonal(rho1)
        q = rho0 if rho0.ndim == 1 else np.diagonal(rho0)
        d = np.clip(p, 0.0, None)
        p = d
    else:
        p, _ = _psd_eigh(rho1, 1e-8, "rho1")
        q, w = _psd_eigh(rho0, 1e-8, "rho0")
        d = np.einsum("ik,ij,jk->k", w, rho1, w)
    p = np.where(p > support_tol, p, 0.0)
    live = q > support_tol
    if np.any(d[~live] > support_tol):
        warnings.warn(
            f"rho0 has no support for weight {d[~live].sum():.3e} of rho1; D is infinite",
            SupportWarning,
            stacklevel=2,
        )
        return math.inf
    return float(np.sum(xlogy(p, p)) - np.sum(d[live] * np.log(q[live])))


def gibbs_relative_entropy(s_red: float, e_red: float, beta: float, log_z: float) -> float:
    """``D(rho|rho_can(beta)) = -S + beta E + ln Z`` using only S and E of rho."""
    return -s_red + beta * e_red + log_z


def _fidelity_from_eigs(lam: np.ndarray) -> float:
    if lam.size and lam[0] < -FIDELITY_NEG_TOL:
        raise ValueError(f"fidelity kernel eigenvalue {lam[0]:.3e} below -{FIDELITY_NEG_TOL:g}")
    # eigenvalues within roundoff of zero would add sqrt(1e-17) ~ 3e-9 each
    floor = lam.size * np.finfo(float).eps * max(float(lam[-1]), 0.0) if lam.size else 0.0
    f = float(np.sum(np.sqrt(np.where(lam > floor, lam, 0.0))) ** 2)
    return min(max(f, 0.0), 1.0)


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``, clipped to [0, 1].

    Commuting diagonal inputs (or 1-D weight vectors) reduce to the
    classical ``(sum sqrt(p q))^2``.
    """
    rho, sigma = np.asarray(rho, float), np.asarray(sigma, float)
    if _is_diagonal(rho) and _is_diagonal(sigma):
        p = rho if rho.ndim == 1 else np.diagonal(rho)
        q = sigma if sigma.ndim == 1 else np.diagonal(sigma)
        if min(p.min(), q.min()) < -FIDELITY_NEG_TOL:
            raise ValueError("negative diagonal weight")
        f = float(np.sum(np.sqrt(np.clip(p, 0, None) * np.clip(q, 0, None))) ** 2)
        return min(max(f, 0.0), 1.0)
    p, u = _psd_eigh(rho, FIDELITY_NEG_TOL, "rho")
    root = (u * np.sqrt(p)) @ u.T
    m = root @ sigma @ root
    return _fidelity_from_eigs(np.linalg.eigvalsh(0.5 * (m + m.T)))


def gibbs_fidelity(rho: np.ndarray, gibbs: GibbsState) -> float:
    """Fidelity against a Gibbs state, using its known eigenbasis."""
    v = gibbs.spectrum.eigenvectors
    r = np.sqrt(gibbs.weights)
    m = (v.T @ rho @ v) * np.outer(r, r)
    return _fidelity_from_eigs(np.linalg.eigvalsh(0.5 * (m + m.T)))


def matched_beta(e_target: float, spectrum: DenseSpectrum, lo: float = 1e-8, hi: float = 1e8) -> float:
    """beta with ``E_can(beta) = e_target``: the minimizer of ``D(rho|rho_can(beta))`` over beta."""
    eps = spectrum.eigenvalues

    def f(logb):
        return float(boltzmann_weights(eps, math.exp(logb)) @ eps) - e_target

    a, b = math.log(lo), math.log(hi)
    if f(a) * f(b) > 0:
        raise ValueError("target energy is outside the canonical range on the beta bracket")
    return math.exp(brentq(f, a, b, xtol=1e-14))


# ---------------------------------------------------------------------------
# correlations

@dataclass(frozen=True)
class CorrelationTable:
    """Rows are either distances (chains) or site pairs (everything else)."""

    pairs: np.ndarray  # (rows, 2) representative pair per row
    distances: np.ndarray | None
    c_red: np.ndarray
    c_can: np.ndarray

    @property
    def delta_c(self) -> np.ndarray:
        return self.c_can - self.c_red


def correlation_matrix(rho: np.ndarray, n_a: int) -> np.ndarray:
    """``C[i, j] = Tr[rho Sz_i Sz_j]`` from the diagonal of rho."""
    d = np.diagonal(rho) if rho.ndim == 2 else rho
    if d.shape[0] != 1 << n_a:
        raise ValueError("rho dimension does not match n_a")
    sz = sz_table(n_a)
    return sz.T @ (d[:, None] * sz)


def spin_correlation(rho: np.ndarray, i: int, j: int) -> float:
    n_a = int(rho.shape[0]).bit_length() - 1
    if not (0 <= i < n_a and 0 <= j < n_a):
        raise ValueError(f"site out of range for {n_a} sites")
    if i == j:
        raise ValueError("i and j must differ")
    d = np.diagonal(rho)
    c = np.arange(d.shape[0])
    return float(d @ ((((c >> i) & 1) - 0.5) * (((c >> j) & 1) - 0.5)))


def correlation_table(c_red: np.ndarray, c_can: np.ndarray, chain: bool) -> CorrelationTable:
    n = c_red.shape[0]
    if chain:
        dists = np.arange(1, n // 2 + 1)
        red, can = [], []
        for d in dists:
            idx = [(i, (i + d) % n) for i in range(n)]
            red.append(np.mean([c_red[i, j] for i, j in idx]))
            can.append(np.mean([c_can[i, j] for i, j in idx]))
        pairs = np.stack([np.zeros_like(dists), dists], axis=1)
        return CorrelationTable(pairs, dists, np.array(red), np.array(can))
    iu, ju = np.triu_indices(n, 1)
    return CorrelationTable(np.stack([iu, ju], axis=1), None, c_red[iu, ju], c_can[iu, ju])


def correlation_difference(rho_red: np.ndarray, rho_can: np.ndarray, n_a: int, chain: bool) -> CorrelationTable:
    return correlation_table(correlation_matrix(rho_red, n_a), correlation_matrix(rho_can, n_a), chain)


def max_abs_delta(tables: Iterable[CorrelationTable]) -> np.ndarray:
    """Row-wise max of |delta C| over a set of lambda points."""
    stack = [np.abs(t.delta_c) for t in tables]
    if not stack:
        return np.array([])
    return np.max(np.stack(stack), axis=0)


# ---------------------------------------------------------------------------
# thermofield-double diagnostic

@dataclass(frozen=True)
class SchmidtDiagnostic:
    distance: float
    degenerate_levels: bool
    schmidt: np.ndarray
    boltzmann: np.ndarray


def schmidt_boltzmann_core(schmidt: np.ndarray, levels: np.ndarray, beta: float, level_tol: float = 1e-10):
    """Total-variation distance between Schmidt weights and Boltzmann weights.

    Both lists are sorted descending before pairing.  Inside a degenerate
    group the Boltzmann weights are equal, so this is the greedy matching;
    the group structure is reported through the flag.
    """
    levels = np.sort(np.asarray(levels, float))
    w = np.sort(boltzmann_weights(levels, beta))[::-1]
    p = np.sort(np.clip(np.asarray(schmidt, float), 0.0, None))[::-1]
    n = max(p.size, w.size)
    p = np.pad(p, (0, n - p.size))
    w = np.pad(w, (0, n - w.size))
    scale = max(1.0, float(np.max(np.abs(levels)))) if levels.size else 1.0
    degenerate = bool(np.any(np.diff(levels) <= level_tol * scale))
    return SchmidtDiagnostic(0.5 * float(np.abs(p - w).sum()), degenerate, p, w)


def schmidt_boltzmann_diagnostic(ground: StateVector, spectrum: DenseSpectrum, b_a: float, n_a: int):
    rho = reduced_density_matrix(ground, n_a)
    return schmidt_boltzmann_core(np.linalg.eigvalsh(rho), spectrum.eigenvalues, b_a)


# ---------------------------------------------------------------------------
# comparison records

@dataclass(frozen=True)
class Comparison:
    s_can: float
    e_can: float
    fidelity: float
    rel_entropy: float
    rel_entropy_reverse: float
    schmidt_tv: float
    rho_can: np.ndarray | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class SweepRecord:
    lam: float
    n_a: int
    s_a: float
    e_a: float
    e_b: float
    b_a: float
    t_a: float
    fidelity_per_site: float
    rel_entropy: float
    degenerate: bool = False
    error: str | None = None
    s_can: float = math.nan
    e_can: float = math.nan
    rel_entropy_reverse: float = math.nan
    b_b: float = math.nan
    t_b: float = math.nan
    schmidt_tv: float = math.nan
    energy: float = math.nan
    residual: float = math.nan
    gap: float = math.nan

    @property
    def s_a_per_site(self) -> float:
        return self.s_a / self.n_a

    @property
    def e_a_per_site(self) -> float:
        return self.e_a / self.n_a


def compare_at_lambda(point: SweepPoint, b_a: float, spectrum: DenseSpectrum, n_a: int, keep_rho=False):
    """Reduced vs Gibbs state at one lambda; ``None`` when B_A is unusable."""
    if point.rho_a is None or not (math.isfinite(b_a) and b_a >= 0):
        return None
    g = gibbs_state(spectrum, b_a)
    curve = canonical_curve(spectrum, [b_a])
    rho_can = g.rho
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SupportWarning)
        reverse = relative_entropy(rho_can, point.rho_a)
    d = gibbs_relative_entropy(point.s_a, point.e_a, b_a, float(curve.log_z[0]))
    tv = schmidt_boltzmann_core(np.linalg.eigvalsh(point.rho_a), spectrum.eigenvalues, b_a).distance
    return Comparison(
        float(curve.entropies[0]),
        float(curve.energies[0]),
        gibbs_fidelity(point.rho_a, g),
        max(d, 0.0) if d > -1e-9 else d,
        reverse,
        tv,
        rho_can if keep_rho else None,
    )


def _record(point: SweepPoint, n_a: int, b_a: float, b_b: float, cmp: Comparison | None) -> SweepRecord:
    kw = {}
    if cmp is not None:
        kw = dict(
            s_can=cmp.s_can,
            e_can=cmp.e_can,
            rel_entropy_reverse=cmp.rel_entropy_reverse,
            schmidt_tv=cmp.schmidt_tv,
        )
    return SweepRecord(
        lam=point.lam,
        n_a=n_a,
        s_a=point.s_a,
        e_a=point.e_a,
        e_b=point.e_b,
        b_a=b_a,
        t_a=temperature(b_a),
        fidelity_per_site=cmp.fidelity ** (1.0 / n_a) if cmp else math.nan,
        rel_entropy=cmp.rel_entropy if cmp else math.nan,
        degenerate=point.degenerate,
        error=point.error,
        b_b=b_b,
        t_b=temperature(b_b),
        energy=point.energy,
        residual=point.residual,
        gap=point.gap,
        **kw,
    )


@dataclass
class SweepAnalysis:
    records: list[SweepRecord]
    correlations: dict[float, CorrelationTable]
    spectrum: DenseSpectrum

    @property
    def n_errors(self) -> int:
        return sum(r.error is not None for r in self.records)

    def interior(self) -> list[SweepRecord]:
        return [r for r in self.records if math.isfinite(r.b_a)]


def _window_records(points: Iterator[SweepPoint], spectrum, n_a, chain, correlations, out_records, out_tables):
    """Consume points in order, finalizing each one once both neighbours are known."""
    window: deque[SweepPoint] = deque(maxlen=3)

    def finalize(prev, cur, nxt):
        if prev is None or nxt is None or not (prev.ok and cur.ok and nxt.ok):
            b_a = b_b = math.nan
        else:
            b_a = central_difference_beta(prev.s_a, nxt.s_a, prev.e_a, nxt.e_a)
            b_b = central_difference_beta(prev.s_a, nxt.s_a, prev.e_b, nxt.e_b)
        cmp = compare_at_lambda(cur, b_a, spectrum, n_a, keep_rho=correlations)
        out_records.append(_record(cur, n_a, b_a, b_b, cmp))
        if correlations and cmp is not None:
            out_tables[cur.lam] = correlation_difference(cur.rho_a, cmp.rho_can, n_a, chain)

    first = True
    for p in points:
        window.append(p)
        if len(window) == 2 and first:
            finalize(None, window[0], window[1])
            first = False
        elif len(window) == 3:
            finalize(window[0], window[1], window[2])
    if len(window) == 1:
        finalize(None, window[0], None)
    elif len(window) >= 2:
        finalize(window[-2], window[-1], None)


def compare_sweep(
    system: CoupledSystem,
    lambdas,
    settings: SolverSettings = SolverSettings(),
    spectrum: DenseSpectrum | None = None,
    correlations: bool = False,
    workers: int | None = None,
) -> SweepAnalysis:
    """Full analysis on a uniform lambda grid, holding at most three density matrices."""
    lambdas = np.asarray(lambdas, float)
    if lambdas.size >= 2 and not np.allclose(np.diff(lambdas), lambdas[1] - lambdas[0], rtol=1e-9, atol=1e-12):
        raise ValueError("lambda grid must be uniformly spaced")
    spectrum = full_spectrum(system.h_a) if spectrum is None else spectrum
    chain = system.model.cluster.kind == "chain"
    records: list[SweepRecord] = []
    tables: dict[float, CorrelationTable] = {}
    points = iter_sweep(system, lambdas, settings, workers)
    _window_records(points, spectrum, system.model.n_a, chain, correlations, records, tables)
    return SweepAnalysis(records, tables, spectrum)


def probe_step(lam: float, delta: float) -> float:
    """Half-width for probe triplets: the grid step, or 1% of lambda when that is larger."""
    return max(delta, 0.01 * abs(lam))


def probe(system, lam, delta, settings=SolverSettings(), spectrum=None, correlations=False) -> SweepAnalysis:
    """Triplet ``(lam-h, lam, lam+h)`` analysed at its centre; returns a one-record analysis."""
    h = probe_step(lam, delta)
    res = compare_sweep(system, [lam - h, lam, lam + h], settings, spectrum, correlations, workers=1)
    return SweepAnalysis([res.records[1]], res.correlations, res.spectrum)


def temperature_ratio(records: Iterable[SweepRecord], j_a: float, j_b: float) -> np.ndarray:
    """``(T_A/J_A) / (T_B/J_B) = B_B J_B / (B_A J_A)`` per record (NaN where undefined)."""
    return np.array([(r.b_b * j_b) / (r.b_a * j_a) if r.b_a else math.nan for r in records])


def subsystem_b_temperature(sweep: Sequence[SweepPoint], delta_lambda: float, j_a: float, j_b: float):
    """Per-point ``(T_B, ratio)`` from central differences of (S_A, E_B)."""
    b_a = effective_beta(sweep, delta_lambda, "e_a")
    b_b = effective_beta(sweep, delta_lambda, "e_b")
    t_b = np.array([temperature(b) for b in b_b])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (b_b * j_b) / (b_a * j_a)
    return t_b, ratio
