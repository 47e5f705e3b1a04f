"""Numerical toolkit for the 1/x linear statistic of the Laguerre unitary ensemble."""

__version__ = "0.1.0"
