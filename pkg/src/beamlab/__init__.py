"""Desk-scale laboratory for location- and orientation-assisted mmWave beam alignment.

Synthesizes geometric indoor channels, builds DFT beam codebooks and beam
graphs, trains graph and dense beam classifiers from scratch, and evaluates
misalignment, spectral efficiency, and robustness.
"""

__version__ = "0.1.0"
