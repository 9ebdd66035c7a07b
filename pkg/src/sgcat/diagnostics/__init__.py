"""Anomaly detectors: physics-based, sensor validation, noise profiling, SVMs."""
