"""Errors, manifest configuration and logging."""
