"""Grounding model components."""

from hierground.model.alignment import GlobalFeatureAlignment
from hierground.model.attention import HierarchicalMaskAttention
from hierground.model.encoders import TextEncoder, VisualEncoder
from hierground.model.grounding import GroundingModel
from hierground.model.locator import PPCLayer, ProgressivePositionCorrector, box_position_encoding
from hierground.model.matcher import CMHMLayer, CrossModalHierarchicalMatcher
from hierground.model.results import (
    AlignedVisual,
    BoxState,
    GroundingOutput,
    GroundingPrediction,
    HierarchyTrace,
    TextTokens,
    VisualTokens,
)

__all__ = [
    "AlignedVisual",
    "BoxState",
    "CMHMLayer",
    "CrossModalHierarchicalMatcher",
    "GlobalFeatureAlignment",
    "GroundingModel",
    "GroundingOutput",
    "GroundingPrediction",
    "HierarchicalMaskAttention",
    "HierarchyTrace",
    "PPCLayer",
    "ProgressivePositionCorrector",
    "TextEncoder",
    "VisualEncoder",
    "box_position_encoding",
]
