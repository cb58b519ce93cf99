"""Split-step quantum walk simulation and variational distribution fitting."""

__version__ = "0.1.0"
