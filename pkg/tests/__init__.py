"""Test suite for sbsim."""
