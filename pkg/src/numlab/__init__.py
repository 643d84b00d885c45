"""Numerical-methods toolkit: Newton iteration, dense linear algebra,
quadrature, Nelder-Mead fitting and L2 polynomial approximation."""

__version__ = "0.1.0"
