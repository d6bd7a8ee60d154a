"""Certified quadrature from boundary Taylor data and convexity bounds."""

__version__ = "0.1.0"
