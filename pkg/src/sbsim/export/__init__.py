"""Output artifact writers."""
