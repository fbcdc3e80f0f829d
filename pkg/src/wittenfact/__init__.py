"""Exact computations around the Witten genus, Hochschild and factorization homology, and BD algebras."""
__version__ = "0.1.0"
