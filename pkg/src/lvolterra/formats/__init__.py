"""Operator documents and trajectory export."""
