"""Exact evaluation of highest-weight vectors of tensor spaces and certification
of border-rank lower bounds by explicit vanishing combinations."""

__version__ = "0.1.0"
