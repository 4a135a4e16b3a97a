"""Exact and numerical tools for non-divergence polytopes, lattice counting and shear dynamics."""
__version__ = "0.1.0"
