"""
graphscribe: knowledge-graph-to-text generation with triplet ordering,
POS-guided copying and semantic context scoring.
"""

__version__ = "0.1.0"

from graphscribe.settings import settings

__all__ = ["settings", "__version__"]
