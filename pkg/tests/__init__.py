"""Tests for the whodunnit package."""
