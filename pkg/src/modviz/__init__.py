"""modviz: train small radio modulation classifiers on synthesized signals
and visualize what they learned via class activation vectors."""

__version__ = "0.1.0"
