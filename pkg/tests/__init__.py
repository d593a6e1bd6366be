"""Test suite for GateLab."""
