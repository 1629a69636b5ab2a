"""Simulator for GHZ-class entanglement generation in lossy, all-to-all
coupled qubits evolving under a non-Hermitian Hamiltonian."""

__version__ = "0.1.0"

from .errors import NumericalFailure, PostSelectionExtinct, ValidationError
from .model import (
    DensityMatrix, SystemConfig, basis_state, build_hamiltonian, embed_single_qubit_op,
    ghz_state, initial_state, product_state, spin_coherent_state,
)
from .evolution import (
    PropagationResult, SpectrumReport, density_matrix, evolve, matrix_exponential,
    normalize, spectrum, time_series,
)
from .entanglement import (
    EntanglementReport, apply_local_phase, fidelity, optimize_local_phases,
    pairwise_concurrence, partial_trace, reduced_density_matrix, report, three_tangle,
    von_neumann_entropy,
)
from .scenarios import ScenarioSpec, SweepResult, check_claims, named_scenario, run_scenario

__all__ = [
    "NumericalFailure", "PostSelectionExtinct", "ValidationError",
    "DensityMatrix", "SystemConfig", "basis_state", "build_hamiltonian", "embed_single_qubit_op",
    "ghz_state", "initial_state", "product_state", "spin_coherent_state",
    "PropagationResult", "SpectrumReport", "density_matrix", "evolve", "matrix_exponential",
    "normalize", "spectrum", "time_series",
    "EntanglementReport", "apply_local_phase", "fidelity", "optimize_local_phases",
    "pairwise_concurrence", "partial_trace", "reduced_density_matrix", "report", "three_tangle",
    "von_neumann_entropy",
    "ScenarioSpec", "SweepResult", "check_claims", "named_scenario", "run_scenario",
]
