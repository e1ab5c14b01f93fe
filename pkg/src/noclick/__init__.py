"""Exact diagonalization of no-click monitored quantum Ising chains.

Builds the effective non-Hermitian Hamiltonians in symmetry sectors, extracts
steady states, imaginary gaps and entanglement, and compares spectral
statistics to random-matrix baselines through the dissipative spectral form
factor.
"""

__version__ = "0.1.0"
