"""Exact diagonalization of Floquet-engineered correlated hopping for hard-core bosons."""
__version__ = "0.1.0"
