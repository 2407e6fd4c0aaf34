"""Two-point statistics of zeros and connection critical points of Gaussian
random analytic functions: exact evaluation, Monte Carlo cross-checks,
simulation, and empirical estimation."""

__version__ = "0.1.0"
