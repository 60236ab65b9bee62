"""Secure vehicular-cloud communication stack and network simulator."""

__version__ = "0.1.0"
