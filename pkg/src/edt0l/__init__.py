"""EDT0L systems for solution sets of integer quadratics and Heisenberg-group equations."""

__version__ = "0.1.0"
