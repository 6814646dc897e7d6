"""Gabor filter-bank features fed to small CNNs: synthesis, fusion, training, detection."""

__version__ = "0.1.0"
