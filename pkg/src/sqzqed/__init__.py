"""Squeezed-light generation and photon-number splitting for a qubit dispersively coupled to a resonator."""
__version__ = "0.1.0"
