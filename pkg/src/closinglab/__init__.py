"""Numerical verification of closing, shadowing and partner-orbit bounds in pinched negative curvature."""

__version__ = "0.1.0"
