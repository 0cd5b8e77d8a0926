"""hierGround package metadata."""

__version__ = "0.1.0"
__author__ = "hierGround contributors"
__license__ = "MIT"
__description__ = "Phrase-hierarchical visual grounding with progressive box correction on synthetic scenes"
