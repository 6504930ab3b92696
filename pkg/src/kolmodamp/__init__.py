"""Spectral solver and diagnostics for the damped 3D Navier-Stokes equations on a periodic box."""

__version__ = "0.1.0"
