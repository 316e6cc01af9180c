"""Automorphic Hardy-space computations for Fuchsian groups acting on the unit disk."""
__version__ = "0.1.0"
