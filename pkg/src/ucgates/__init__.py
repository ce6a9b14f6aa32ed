"""Synthesis of quantum circuits from uniformly controlled one-qubit gates."""

__version__ = "0.1.0"
