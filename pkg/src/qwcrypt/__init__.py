"""Simulation and security analysis of polarisation-key encrypted boson
sampling and multi-walker quantum walks."""

__version__ = "0.1.0"
