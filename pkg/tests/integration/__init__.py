"""Integration tests for RF Serial GUI Controller."""
