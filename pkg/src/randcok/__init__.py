"""Exact cokernels of random integral matrices, their limiting statistics and
Monte Carlo checks of them."""

__version__ = "0.1.0"
