"""Arbitrary-precision evaluation of Kronecker-Eisenstein series,
generalized Dedekind sums and the degree-(N-1) cocycle over imaginary
quadratic fields, with smoothed partial zeta values, critical Hecke
L-values and algebraicity certification."""

__version__ = "0.1.0"
