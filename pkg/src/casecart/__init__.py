"""Discrete-event simulation of surgical case-cart logistics."""
__version__ = "0.1.0"
