"""Sphere-area process of the Brownian plane."""
__version__ = "0.1.0"
