"""Correlation kernels of determinantal point processes on the one-dimensional
lattice, computed as spectral projections of tridiagonal difference operators
and checked against exact enumeration over Young diagrams."""

__version__ = "0.1.0"
