"""Multilayer community-benchmark generator, correlation measures and spreading simulator."""

__version__ = "0.1.0"
