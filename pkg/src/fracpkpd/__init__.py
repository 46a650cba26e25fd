"""Linear psi-Caputo fractional systems and a fractional propofol PK/PD model."""

__version__ = "0.1.0"
