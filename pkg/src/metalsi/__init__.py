"""Log-Sobolev and entropy-flow checks for bosonic Gaussian semigroups."""
__version__ = "0.1.0"
