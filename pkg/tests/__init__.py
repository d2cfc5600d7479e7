"""Tests for xsams-provenance."""
