"""Contention-aware list scheduling of stream-processing task graphs."""
