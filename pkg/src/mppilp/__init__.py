"""Optimal multi-robot path planning on graphs via time-expanded ILP models."""

__version__ = "0.1.0"
