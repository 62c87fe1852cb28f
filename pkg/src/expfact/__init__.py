"""Exponential product expansions (Wilcox, Fer, Zassenhaus) for linear ODEs."""

__version__ = "0.1.0"
