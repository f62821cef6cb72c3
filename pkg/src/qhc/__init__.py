"""Exact constructions of quantized enveloping algebra modules for Hermitian
symmetric pairs, and the spherical principal series realized on them."""

__version__ = "0.1.0"
