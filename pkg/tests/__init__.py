"""Tests for the code checker pytest implementation."""
