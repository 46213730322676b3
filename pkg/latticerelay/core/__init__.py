"""Closed-form rate analysis and lattice geometry."""
