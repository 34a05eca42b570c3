"""Mini-Pommerman lab: A3C with MCTS action guidance and exact hazard analysis."""

__version__ = "0.1.0"
