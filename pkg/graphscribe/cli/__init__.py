"""
Graphscribe CLI

Command-line interface for preprocessing, training, generation and evaluation.
"""

from graphscribe.cli.main import app

__all__ = ["app"]
