"""Poem meter classification toolkit.

Two classifiers over one text model: a deterministic scansion engine
built on the classical Arabic foot/meter tables, and a from-scratch
recurrent neural network trained on character-encoded verses.
"""

__version__ = "0.1.0"
