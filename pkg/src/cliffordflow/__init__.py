"""Symmetry-reduced Allen-Cahn gradient flow on spheres and Clifford hypersurfaces."""

__version__ = "0.1.0"
