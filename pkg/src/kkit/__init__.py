"""Geometric-side computations for the Kuznetsov sum formula on Hilbert
modular groups over Q and real quadratic fields."""

__version__ = "0.1.0"
