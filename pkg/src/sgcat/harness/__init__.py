"""Scenario configuration, run loop, batches, benchmark and CLI."""
