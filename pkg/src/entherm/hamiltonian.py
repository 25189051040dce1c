"""Fixed-Sz bases and the matrix-free Heisenberg operator."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np

from . import _kernels
from .lattice import CoupledModel

# 2 GiB of int64 configurations
DEFAULT_MEMORY_BUDGET = 2 * 1024**3
MAX_DENSE_SITES = 14


class SectorTooLargeError(MemoryError):
    pass


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Sorted bit-packed configurations with a fixed number of up spins.

    Bit ``s`` of a configuration is set when site ``s`` is spin up.
    """

    n_sites: int
    n_up: int
    states: np.ndarray

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    @cached_property
    def lookup(self) -> tuple[int, np.ndarray]:
        """High-bit bracket table used by the compiled matvec."""
        return _kernels.bucket_index(self.states, self.n_sites)

    def index(self, config):
        """Ordinal of one or more configurations; raises KeyError if absent."""
        config = np.asarray(config, dtype=np.int64)
        k = np.searchsorted(self.states, config)
        k_clipped = np.minimum(k, self.dim - 1)
        if np.any(self.states[k_clipped] != config):
            raise KeyError(f"configuration(s) not in sector n_up={self.n_up}")
        return k_clipped if k_clipped.ndim else int(k_clipped)


def enumerate_sector(n_sites: int, n_up: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> SectorBasis:
    if not (0 <= n_up <= n_sites <= 32):
        raise ValueError(f"need 0 <= n_up <= n_sites <= 32, got n_sites={n_sites}, n_up={n_up}")
    count = comb(n_sites, n_up)
    if count * 8 > memory_budget:
        raise SectorTooLargeError(
            f"sector C({n_sites},{n_up}) = {count} states exceeds the {memory_budget} byte budget"
        )
    states = _kernels.enumerate_states(n_sites, n_up)
    states.setflags(write=False)
    return SectorBasis(n_sites, n_up, states)


@dataclass(frozen=True)
class StateVector:
    basis: SectorBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (self.basis.dim,):
            raise ValueError("amplitude length does not match the basis")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True, eq=False)
class HeisenbergOperator:
    """``sum_b J_b S_i . S_j`` over a list of weighted bonds."""

    n_sites: int
    site_i: np.ndarray
    site_j: np.ndarray
    coupling: np.ndarray

    @classmethod
    def from_bonds(cls, n_sites: int, bonds) -> "HeisenbergOperator":
        """``bonds`` is an iterable of ``(i, j, J)``."""
        bonds = list(bonds)
        si = np.array([b[0] for b in bonds], dtype=np.int64)
        sj = np.array([b[1] for b in bonds], dtype=np.int64)
        J = np.array([b[2] for b in bonds], dtype=np.float64)
        if len(bonds):
            if si.min() < 0 or sj.min() < 0 or max(si.max(), sj.max()) >= n_sites:
                raise ValueError("bond site out of range")
            if np.any(si == sj):
                raise ValueError("self-bond in Heisenberg operator")
        for a in (si, sj, J):
            a.setflags(write=False)
        return cls(n_sites, si, sj, J)

    @property
    def n_bonds(self) -> int:
        return self.site_i.shape[0]

    def apply(self, basis: SectorBasis, v: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        if basis.n_sites != self.n_sites:
            raise ValueError("basis and operator disagree on the number of sites")
        v = np.ascontiguousarray(v, dtype=np.float64)
        return _kernels.heisenberg_matvec(
            basis.states, self.site_i, self.site_j, self.coupling, v, out, basis.lookup
        )

    def linear_operator(self, basis: SectorBasis):
        """Callable ``v -> H v`` on ``basis`` (what the eigensolver expects)."""
        buf = np.empty(basis.dim)

        def matvec(v):
            return self.apply(basis, v, buf).copy()

        return matvec

    def sector_matrix(self, basis: SectorBasis) -> np.ndarray:
        """Dense sector block assembled column by column from ``apply``."""
        eye = np.eye(basis.dim)
        return np.column_stack([self.apply(basis, eye[:, k]) for k in range(basis.dim)])


def apply(op: HeisenbergOperator, v: StateVector) -> StateVector:
    return StateVector(v.basis, op.apply(v.basis, v.amplitudes))


def build_dense(op: HeisenbergOperator, n_sites: int | None = None) -> np.ndarray:
    """Full ``2^n x 2^n`` matrix over all Sz sectors."""
    n = op.n_sites if n_sites is None else n_sites
    if n != op.n_sites:
        raise ValueError("n_sites does not match the operator")
    if n > MAX_DENSE_SITES:
        raise SectorTooLargeError(f"dense matrix for {n} sites exceeds the {MAX_DENSE_SITES}-site guard")
    h = _kernels.heisenberg_dense(n, op.site_i, op.site_j, op.coupling)
    # bond terms are symmetric entry by entry; enforce bitwise symmetry
    return 0.5 * (h + h.T)


def sector_block(dense: np.ndarray, basis: SectorBasis) -> np.ndarray:
    idx = basis.states
    return dense[np.ix_(idx, idx)]


# ---------------------------------------------------------------------------
# operators of the coupled model

def coupled_operator(model: CoupledModel) -> HeisenbergOperator:
    bonds = [(i, j, model.j_a) for i, j in model.bonds_a]
    bonds += [(i, j, model.j_b) for i, j in model.bonds_b]
    if model.lam != 0.0:
        bonds += [(i, j, model.lam) for i, j in model.rung_bonds]
    return HeisenbergOperator.from_bonds(model.n_sites, bonds)


def layer_operator(model: CoupledModel, layer: str = "a", embedded: bool = False) -> HeisenbergOperator:
    """H_A or H_B.

    With ``embedded=False`` the operator acts on the layer's own
    ``n_a`` sites (local indices); with ``embedded=True`` it acts on the
    full coupled system (``H_A x I_B`` or ``I_A x H_B``).
    """
    n = model.n_a
    if layer == "a":
        bonds, J, offset = model.bonds_a, model.j_a, 0
    elif layer == "b":
        bonds, J, offset = model.bonds_b, model.j_b, n
    else:
        raise ValueError("layer must be 'a' or 'b'")
    if embedded:
        return HeisenbergOperator.from_bonds(model.n_sites, [(i, j, J) for i, j in bonds])
    return HeisenbergOperator.from_bonds(n, [(i - offset, j - offset, J) for i, j in bonds])


@dataclass(frozen=True, eq=False)
class CoupledSystem:
    """Coupled model plus its Sz=0 sector basis, cached across lambda values."""

    model: CoupledModel

    @cached_property
    def basis(self) -> SectorBasis:
        if self.model.n_sites % 2:
            raise ValueError("coupled system has an odd number of sites; no Sz=0 sector")
        return enumerate_sector(self.model.n_sites, self.model.n_sites // 2)

    @cached_property
    def h_a(self) -> np.ndarray:
        return build_dense(layer_operator(self.model, "a"))

    @cached_property
    def h_b(self) -> np.ndarray:
        return build_dense(layer_operator(self.model, "b"))

    def operator(self, lam: float) -> HeisenbergOperator:
        return coupled_operator(self.model.with_lambda(lam))
