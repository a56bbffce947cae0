"""Unit tests for RF Serial GUI Controller."""
