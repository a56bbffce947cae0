"""Tests for RF Serial GUI Controller."""
