"""Synthetic power-grid fault and cyber-attack study toolkit.

Generates labeled measurement windows on the IEEE 14-bus system, trains four
classifiers on them, and analyzes captured event windows into a verdict.
"""

__version__ = "0.1.0"
