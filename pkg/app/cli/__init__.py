"""Benchmark harness for the detection and prediction experiments."""
