"""Arithmetic random waves on the 2-torus and their zeros along segments."""
__version__ = "0.1.0"
