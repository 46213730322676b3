"""Tests for latticerelay."""
