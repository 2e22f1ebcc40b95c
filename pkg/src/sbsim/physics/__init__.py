"""Finite-difference thermal grid and HVAC plant models."""
