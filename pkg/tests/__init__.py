"""Tests for invariant-kit."""
