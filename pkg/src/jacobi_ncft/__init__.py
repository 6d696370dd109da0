"""Bounded Jacobi operators, their orthogonal polynomials and spectral measures,
applied to the gauge-fixed matrix model at Omega^2 = 1/3."""

__version__ = "0.1.0"
