"""latticerelay - nested lattice coding analysis for the Gaussian two-way relay channel."""

__version__ = "0.1.0"
