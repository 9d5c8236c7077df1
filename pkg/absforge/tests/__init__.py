"""Tests for absforge."""
