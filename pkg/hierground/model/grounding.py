"""End-to-end grounding model: encoders, alignment, hierarchical matching, position correction."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from typing import TYPE_CHECKING

import numpy as np

from hierground.autodiff.nn import MLP, Module
from hierground.errors import InputError
from hierground.model.alignment import GlobalFeatureAlignment
from hierground.model.encoders import TextEncoder, VisualEncoder
from hierground.model.locator import ProgressivePositionCorrector
from hierground.model.matcher import CrossModalHierarchicalMatcher
from hierground.model.results import GroundingOutput, GroundingPrediction, HierarchyTrace
from hierground.text.chunker import HierMask
from hierground.text.lexicon import DEFAULT_LEXICON, Lexicon
from hierground.utils.seeding import INIT, substream

if TYPE_CHECKING:
    from hierground.config import RunConfig

logger = logging.getLogger("hierground.model.grounding")


class GroundingModel(Module):
    """The full pipeline, with components switched off by the config's ablation flags.

    Disabled components create no parameters, so every parameter of a built
    model receives a gradient.
    """

    def __init__(self, config: RunConfig, lexicon: Lexicon = DEFAULT_LEXICON):
        self.config = config
        self.lexicon = lexicon
        rng = substream(config.seed, INIT)
        c = config
        self.visual_encoder = VisualEncoder(c.dim, c.heads, c.visual_layers, c.patch_size, c.ff_mult, rng)
        self.text_encoder = TextEncoder(lexicon.size, c.dim, c.heads, c.text_layers, c.max_text_len, c.ff_mult, rng)
        self.alignment = GlobalFeatureAlignment(c.dim, c.heads, rng, enabled=not c.disable_gfcma)
        if not c.disable_cmhm:
            self.matcher = CrossModalHierarchicalMatcher(c.dim, c.heads, rng)
        if c.disable_ppc:
            self.pooled_head = MLP([c.dim, c.dim, 4], rng)
        else:
            self.locator = ProgressivePositionCorrector(c.dim, c.heads, rng, use_box_feedback=not c.disable_hpc)
        logger.debug("built %s model with %d parameter tensors", c.ablation_name, len(self.parameters()))

    def forward(self, image: np.ndarray, token_ids: Sequence[int], masks: Sequence[HierMask]) -> GroundingOutput:
        if not masks:
            raise InputError("grounding needs at least one hierarchical mask")
        c = self.config
        visual = self.visual_encoder(image)
        text = self.text_encoder(token_ids)
        aligned = self.alignment(visual, text, c.inverse_temperature)

        if c.disable_cmhm:
            trace = HierarchyTrace(features=[aligned.features, aligned.features])
        else:
            trace = self.matcher(aligned, visual, text, masks, c.hier_lambda, c.mask_mode)

        if c.disable_ppc:
            pooled = trace.final.mean(axis=0, keepdims=True)
            prediction = GroundingPrediction(boxes=[self.pooled_head(pooled).sigmoid().reshape(4)])
        else:
            prediction = self.locator(
                text.features,
                masks,
                visual.features,
                trace.final,
                c.iterations,
                c.hier_lambda,
                c.mask_mode,
                c.box_mode,
                c.box_carry,
            )
        return GroundingOutput(
            prediction=prediction,
            visual=visual,
            text=text,
            aligned=aligned,
            trace=trace,
            num_levels=len(masks),
        )
