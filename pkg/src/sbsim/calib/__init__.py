"""Telemetry, fidelity metrics and parameter calibration."""
