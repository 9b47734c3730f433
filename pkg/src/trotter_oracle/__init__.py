"""Trotter-error oracles, phase-error estimators and QPE resource estimates."""
from .pauli import PauliString, PauliSum, commutator_bound, l1_norm, to_dense_matrix
from .hamiltonians import load_hamiltonian, random_pauli_hamiltonian, save_hamiltonian, spectral_norm
from .dynamics import exact_eigenpairs, schedule_unitary, trotter_schedule
from .errors import approx_phase_error, fit_wk, phase_error, trotter_error
from .rng import RngSeed

__version__ = "0.1.0"
