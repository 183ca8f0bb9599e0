"""Quantum Darwinism and non-Markovian dephasing of a qubit in an XX-model spin bath."""

__version__ = "0.1.0"
