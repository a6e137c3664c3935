"""Explain-then-classify harness for multi-label emotion detection.

Phase one asks a backend for a short contextual explanation of every sentence;
phase two trains a multi-label classifier on ``text + " " + explanation`` and
scores it with per-label, macro and micro precision/recall/F1 over seeded runs.
"""

from lotus.corpus import EMOTIONS

__version__ = "0.1.0"
__all__ = ["EMOTIONS", "__version__"]
