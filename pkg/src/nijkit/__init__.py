"""Exact symbolic computation for Nijenhuis geometry and Poisson-Nijenhuis pairs."""

__version__ = "0.1.0"
