"""Test suite for the typing simulator."""
