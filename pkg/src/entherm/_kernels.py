"""Hot loops for bit-packed spin-1/2 bases.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with the same signature.  The active backend is picked once at
import time from ``ENTHERM_BACKEND`` (``numba`` or ``numpy``); when numba
is missing the numpy path is used regardless.  ``set_backend`` switches at
runtime, which the benchmark and the backend-equivalence tests rely on.
"""

from __future__ import annotations

import os
from itertools import combinations
from math import comb

import numpy as np

# the bundled TBB is too old for numba's TBB layer; OpenMP avoids a warning per import
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

try:
    import numba
    from numba import njit, prange

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

BACKENDS = ("numba", "numpy")


def _initial_backend() -> str:
    requested = os.environ.get("ENTHERM_BACKEND", "numba").strip().lower()
    if requested not in BACKENDS:
        raise ValueError(f"ENTHERM_BACKEND must be one of {BACKENDS}, got {requested!r}")
    if requested == "numba" and not NUMBA_AVAILABLE:
        return "numpy"
    return requested


_backend = _initial_backend()


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Select the kernel backend; returns the previous one."""
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba backend requested but numba is not importable")
    previous, _backend = _backend, name
    return previous


def configure_threads() -> int:
    """Apply ENTHERM_THREADS to numba's pool; returns the worker count to use."""
    raw = os.environ.get("ENTHERM_THREADS")
    n = os.cpu_count() or 1
    if raw:
        n = max(1, int(raw))
    if NUMBA_AVAILABLE:
        n = min(n, numba.config.NUMBA_NUM_THREADS)
        numba.set_num_threads(n)
    return n


# ---------------------------------------------------------------------------
# sector enumeration

def _enumerate_numpy(n_sites: int, n_up: int) -> np.ndarray:
    if n_sites <= 26:
        allstates = np.arange(1 << n_sites, dtype=np.int64)
        return allstates[np.bitwise_count(allstates) == n_up]
    # filtering 2^n integers no longer fits; build from combinations
    out = np.fromiter(
        (sum(1 << s for s in sites) for sites in combinations(range(n_sites), n_up)),
        dtype=np.int64,
        count=comb(n_sites, n_up),
    )
    out.sort()
    return out


if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _enumerate_numba(n_sites, n_up, count):
        out = np.empty(count, dtype=np.int64)
        if count == 0:
            return out
        if n_up == 0:
            out[0] = 0
            return out
        state = (np.int64(1) << n_up) - 1
        for k in range(count):
            out[k] = state
            # Gosper's hack: next integer with the same popcount
            c = state & -state
            r = state + c
            state = (((r ^ state) >> 2) // c) | r
        return out


def enumerate_states(n_sites: int, n_up: int) -> np.ndarray:
    """Sorted bit-packed configurations with ``n_up`` set bits."""
    if _backend == "numba":
        return _enumerate_numba(n_sites, n_up, comb(n_sites, n_up))
    return _enumerate_numpy(n_sites, n_up)


# ---------------------------------------------------------------------------
# Heisenberg matvec on a fixed-Sz sector
#
# H = sum_b J_b [ Sz_i Sz_j + (S+_i S-_j + S-_i S+_j) / 2 ]
# Rows are independent, so the numba kernel is parallel over output states.

def _matvec_numpy(states, site_i, site_j, coupling, v, out):
    out[:] = 0.0
    for i, j, J in zip(site_i.tolist(), site_j.tolist(), coupling.tolist()):
        antiparallel = ((states >> i) ^ (states >> j)) & 1
        out += np.where(antiparallel == 1, -0.25 * J, 0.25 * J) * v
        rows = np.flatnonzero(antiparallel)
        partners = np.searchsorted(states, states[rows] ^ ((1 << i) | (1 << j)))
        out[rows] += 0.5 * J * v[partners]
    return out


# The numba kernel brackets each binary search with a table over the high
# bits: states[start[h]:start[h+1]] are those with (state >> shift) == h.
# A plain search over the whole list is latency-bound; the bracket keeps
# the search inside a few cache lines.
BUCKET_LOW_BITS = 4
MAX_BUCKET_BITS = 22


def bucket_index(states: np.ndarray, n_sites: int) -> tuple[int, np.ndarray]:
    shift = max(BUCKET_LOW_BITS, n_sites - MAX_BUCKET_BITS)
    shift = min(shift, n_sites)
    edges = np.arange((1 << (n_sites - shift)) + 1, dtype=np.int64) << shift
    return shift, np.searchsorted(states, edges).astype(np.int64)


if NUMBA_AVAILABLE:

    @njit(cache=True, parallel=True, nogil=True)
    def _matvec_numba(states, shift, start, site_i, site_j, coupling, v, out):
        n = states.shape[0]
        nb = site_i.shape[0]
        for k in prange(n):
            s = states[k]
            acc = 0.0
            vk = v[k]
            for b in range(nb):
                i = site_i[b]
                j = site_j[b]
                J = coupling[b]
                if ((s >> i) ^ (s >> j)) & 1:
                    acc -= 0.25 * J * vk
                    t = s ^ ((np.int64(1) << i) | (np.int64(1) << j))
                    h = t >> shift
                    lo = start[h]
                    hi = start[h + 1] - 1
                    while lo < hi:
                        mid = (lo + hi) >> 1
                        if states[mid] < t:
                            lo = mid + 1
                        else:
                            hi = mid
                    acc += 0.5 * J * v[lo]
                else:
                    acc += 0.25 * J * vk
            out[k] = acc
        return out


def heisenberg_matvec(states, site_i, site_j, coupling, v, out=None, index=None):
    """``out = H v`` for a Heisenberg bond list restricted to ``states``.

    ``index`` is the ``(shift, start)`` pair from ``bucket_index``; it is
    rebuilt on each call when omitted, so callers applying H repeatedly
    should cache it.
    """
    if out is None:
        out = np.empty_like(v, dtype=np.float64)
    if _backend == "numba":
        if index is None:
            n_sites = int(states[-1]).bit_length() if states.size else 0
            index = bucket_index(states, n_sites)
        shift, start = index
        return _matvec_numba(states, shift, start, site_i, site_j, coupling, v, out)
    return _matvec_numpy(states, site_i, site_j, coupling, v, out)


# ---------------------------------------------------------------------------
# dense matrix over the full 2^n space (no lookup needed: index == state)

def _dense_numpy(n_sites, site_i, site_j, coupling):
    dim = 1 << n_sites
    h = np.zeros((dim, dim))
    states = np.arange(dim, dtype=np.int64)
    for i, j, J in zip(site_i.tolist(), site_j.tolist(), coupling.tolist()):
        antiparallel = ((states >> i) ^ (states >> j)) & 1
        h[states, states] += np.where(antiparallel == 1, -0.25 * J, 0.25 * J)
        rows = np.flatnonzero(antiparallel)
        h[rows, rows ^ ((1 << i) | (1 << j))] += 0.5 * J
    return h


if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _dense_numba(n_sites, site_i, site_j, coupling):
        dim = np.int64(1) << n_sites
        h = np.zeros((dim, dim))
        for s in range(dim):
            for b in range(site_i.shape[0]):
                i = site_i[b]
                j = site_j[b]
                J = coupling[b]
                if ((s >> i) ^ (s >> j)) & 1:
                    h[s, s] -= 0.25 * J
                    h[s, s ^ ((np.int64(1) << i) | (np.int64(1) << j))] += 0.5 * J
                else:
                    h[s, s] += 0.25 * J
        return h


def heisenberg_dense(n_sites, site_i, site_j, coupling):
    if _backend == "numba":
        return _dense_numba(n_sites, site_i, site_j, coupling)
    return _dense_numpy(n_sites, site_i, site_j, coupling)
