"""lvolterra - tools for l-Volterra quadratic stochastic operators on the simplex."""

__version__ = "0.1.0"
