"""Entanglement-induced effective temperature of coupled Heisenberg layers.

Exact diagonalization of two spin-1/2 layers joined by rung couplings,
with the reduced state of one layer compared against the Gibbs state of
its own Hamiltonian.
"""

__version__ = "0.1.0"

from .lattice import ClusterSpec, BondList, CoupledModel, build_cluster, build_coupled_model
from .hamiltonian import SectorBasis, StateVector, HeisenbergOperator, CoupledSystem, enumerate_sector
from .eigensolver import GroundStateResult, DenseSpectrum, lanczos_ground_state, full_spectrum
from .entanglement import reduced_density_matrix, von_neumann_entropy, subsystem_energy, entanglement_spectrum
from .canonical import CanonicalCurve, GibbsState, canonical_curve, gibbs_state
from .thermo import SweepRecord, CorrelationTable, compare_sweep, effective_beta, fidelity, relative_entropy

__all__ = [
    "ClusterSpec", "BondList", "CoupledModel", "build_cluster", "build_coupled_model",
    "SectorBasis", "StateVector", "HeisenbergOperator", "CoupledSystem", "enumerate_sector",
    "GroundStateResult", "DenseSpectrum", "lanczos_ground_state", "full_spectrum",
    "reduced_density_matrix", "von_neumann_entropy", "subsystem_energy", "entanglement_spectrum",
    "CanonicalCurve", "GibbsState", "canonical_curve", "gibbs_state",
    "SweepRecord", "CorrelationTable", "compare_sweep", "effective_beta", "fidelity", "relative_entropy",
]
