"""hierGround - Phrase-hierarchical visual grounding with progressive box correction."""

from hierground.about import __author__, __version__
from hierground.config import RunConfig
from hierground.errors import GroundingError

__all__ = [
    "HierGrounder",
    "RunConfig",
    "GroundingError",
    "__author__",
    "__version__",
]


def __getattr__(name):
    # Lazy import HierGrounder to keep nltk and the model stack off the import path
    if name == "HierGrounder":
        from hierground.grounder import HierGrounder

        return HierGrounder
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
