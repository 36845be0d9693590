"""edgevote - majority votes over weakly relevant and irrelevant boolean variables."""

from .constants import __version__

__all__ = ["__version__"]
