"""Receiver models for coherent-state PPM demodulation with conditional pulse nulling."""

__version__ = "0.1.0"
