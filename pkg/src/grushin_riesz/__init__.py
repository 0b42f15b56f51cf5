"""Numerical Riesz transforms for the Grushin operator -Delta_xi - |xi|^2 d^2/deta^2."""

__version__ = "0.1.0"
