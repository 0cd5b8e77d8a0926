"""Run configuration for hierGround."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from typing import Any

from hierground.errors import ConfigurationError

MASK_MODES = ("additive", "literal")
BOX_MODES = ("centered", "literal")
BOX_CARRY = ("reset", "accumulate")
CHECKPOINT_DTYPES = ("float64", "float32")

# smallest object count that can realise each expression depth
MIN_OBJECTS_FOR_DEPTH = {1: 1, 2: 3, 3: 4}

_TUPLE_FIELDS = ("betas", "train_seeds", "val_seeds", "test_seeds", "depths")

_SIGNATURE_FIELDS = (
    "dim",
    "heads",
    "visual_layers",
    "text_layers",
    "patch_size",
    "image_size",
    "max_text_len",
    "ff_mult",
    "disable_gfcma",
    "disable_cmhm",
    "disable_ppc",
    "disable_hpc",
)


@dataclass
class RunConfig:
    """Configuration for one training/evaluation run.

    Attributes:
        dim: Feature width C shared by every module.
        heads: Attention heads; must divide ``dim``.
        visual_layers: Self-attention layers in the image encoder.
        text_layers: Self-attention layers in the text encoder.
        patch_size: Side of the square image patches.
        image_size: Side of the square input rasters.
        max_text_len: Longest accepted expression in tokens.
        ff_mult: Hidden width multiplier of transformer feed-forwards.
        hier_lambda: Weakening factor (> 1) for positions enabled at the previous hierarchy.
        inverse_temperature: Sharpness of the global alignment softmax.
        lambda1: Weight of the L1 box term.
        lambda2: Weight of the GIoU box term.
        iterations: Position-correction rounds N.
        max_phrases: Phrase cap; trailing phrases merge into the last one.
        mask_mode: "additive" (masked scores get -LARGE) or "literal" (masked scores only zeroed).
        box_mode: "centered" (deltas in (-0.5, 0.5), clamped) or "literal" (positive deltas).
        box_carry: "reset" restarts the box each iteration, "accumulate" carries it over.
        learning_rate: AdamW step size.
        betas: AdamW moment decay rates.
        weight_decay: Decoupled weight decay.
        adam_eps: AdamW denominator epsilon.
        grad_clip: Global gradient-norm clip (0 disables).
        batch_size: Scenes per optimizer step.
        epochs: Passes over the training split.
        train_seeds: (start, count) of training scene seeds.
        val_seeds: (start, count) of validation scene seeds.
        test_seeds: (start, count) of test scene seeds.
        depths: Expression depths cycled over seeds.
        min_objects: Fewest objects per scene.
        max_objects: Most objects per scene.
        prec_threshold: IoU threshold of the precision metric.
        prec_inclusive: Count IoU == threshold as a hit.
        disable_gfcma: Drop the global alignment layer (keep the attention residual).
        disable_cmhm: Replace hierarchical matching with identity.
        disable_ppc: Replace position correction with a pooled regression head.
        disable_hpc: Keep PPC layers but drop box correction and feedback.
        seed: Run seed; all randomness derives from it.
        checkpoint_dtype: Scalar width used when writing checkpoints.
        output_dir: Directory for logs and checkpoints.
    """

    dim: int = 64
    heads: int = 4
    visual_layers: int = 2
    text_layers: int = 2
    patch_size: int = 8
    image_size: int = 64
    max_text_len: int = 40
    ff_mult: int = 2
    hier_lambda: float = 2.0
    inverse_temperature: float = 10.0
    lambda1: float = 2.0
    lambda2: float = 5.0
    iterations: int = 6
    max_phrases: int = 4
    mask_mode: str = "additive"
    box_mode: str = "centered"
    box_carry: str = "reset"
    learning_rate: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.999)
    weight_decay: float = 1e-4
    adam_eps: float = 1e-8
    grad_clip: float = 1.0
    batch_size: int = 32
    epochs: int = 60
    train_seeds: tuple[int, int] = (0, 2000)
    val_seeds: tuple[int, int] = (1_000_000, 500)
    test_seeds: tuple[int, int] = (2_000_000, 500)
    depths: tuple[int, ...] = (1, 2, 3)
    min_objects: int = 2
    max_objects: int = 6
    prec_threshold: float = 0.5
    prec_inclusive: bool = False
    disable_gfcma: bool = False
    disable_cmhm: bool = False
    disable_ppc: bool = False
    disable_hpc: bool = False
    seed: int = 0
    checkpoint_dtype: str = "float64"
    output_dir: str | None = None

    def __post_init__(self):
        for name in _TUPLE_FIELDS:
            setattr(self, name, tuple(getattr(self, name)))
        self._validate()

    def _validate(self) -> None:
        if self.dim < 4 or self.heads < 1 or self.dim % self.heads:
            raise ConfigurationError(f"dim={self.dim} must be divisible by heads={self.heads}")
        if self.dim % 4:
            raise ConfigurationError(f"dim={self.dim} must be divisible by 4 (box and 2-D position encodings)")
        if self.patch_size < 1 or self.image_size % self.patch_size:
            raise ConfigurationError(f"image_size={self.image_size} is not divisible by patch_size={self.patch_size}")
        if self.hier_lambda <= 1:
            raise ConfigurationError(f"hier_lambda must be > 1, got {self.hier_lambda}")
        if self.inverse_temperature <= 0:
            raise ConfigurationError(f"inverse_temperature must be positive, got {self.inverse_temperature}")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ConfigurationError(f"loss weights must be non-negative, got {self.lambda1}, {self.lambda2}")
        for name in ("iterations", "max_phrases", "batch_size", "max_text_len", "ff_mult"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.epochs < 0 or self.visual_layers < 0 or self.text_layers < 0:
            raise ConfigurationError("epochs and layer counts must be non-negative")
        for name, value, allowed in (
            ("mask_mode", self.mask_mode, MASK_MODES),
            ("box_mode", self.box_mode, BOX_MODES),
            ("box_carry", self.box_carry, BOX_CARRY),
            ("checkpoint_dtype", self.checkpoint_dtype, CHECKPOINT_DTYPES),
        ):
            if value not in allowed:
                raise ConfigurationError(f"{name} must be one of {allowed}, got {value!r}")
        if self.learning_rate <= 0 or self.weight_decay < 0 or self.grad_clip < 0:
            raise ConfigurationError("learning_rate must be positive; weight_decay and grad_clip non-negative")
        if len(self.betas) != 2 or not all(0 <= b < 1 for b in self.betas):
            raise ConfigurationError(f"betas must be two values in [0, 1), got {self.betas}")
        if not 0 < self.prec_threshold < 1:
            raise ConfigurationError(f"prec_threshold must lie in (0, 1), got {self.prec_threshold}")
        if not self.depths or any(d not in MIN_OBJECTS_FOR_DEPTH for d in self.depths):
            raise ConfigurationError(f"depths must be a non-empty subset of (1, 2, 3), got {self.depths}")
        if self.min_objects < 1 or self.max_objects < self.min_objects:
            raise ConfigurationError(f"object range [{self.min_objects}, {self.max_objects}] is empty")
        needed = max(MIN_OBJECTS_FOR_DEPTH[d] for d in self.depths)
        if self.max_objects < needed:
            raise ConfigurationError(f"depths {self.depths} need max_objects >= {needed}, got {self.max_objects}")
        self._validate_splits()

    def _validate_splits(self) -> None:
        ranges = {"train": self.train_seeds, "val": self.val_seeds, "test": self.test_seeds}
        for name, pair in ranges.items():
            if len(pair) != 2 or pair[0] < 0 or pair[1] < 0:
                raise ConfigurationError(f"{name}_seeds must be (start >= 0, count >= 0), got {pair}")
        items = sorted(ranges.items(), key=lambda kv: kv[1][0])
        for (name_a, (start_a, count_a)), (name_b, (start_b, _)) in zip(items, items[1:]):
            if start_a + count_a > start_b:
                raise ConfigurationError(f"{name_a} and {name_b} seed ranges overlap")

    @property
    def ablation_name(self) -> str:
        """Ladder row this configuration corresponds to."""
        if self.disable_gfcma and self.disable_cmhm and self.disable_ppc:
            return "Baseline"
        if self.disable_cmhm and self.disable_ppc:
            return "+GFCMA"
        if self.disable_ppc:
            return "+CMHM"
        if self.disable_hpc:
            return "+PPC w/o HPC"
        if self.disable_gfcma or self.disable_cmhm:
            return "custom"
        return "+PPC"

    @property
    def effective_output_dir(self) -> str:
        if self.output_dir:
            return self.output_dir
        return f"./runs/{self.ablation_name.replace(' ', '_').replace('/', '_').lstrip('+')}_seed{self.seed}"

    @property
    def model_signature(self) -> dict[str, Any]:
        """Fields that determine parameter shapes; checkpoints must agree on them."""
        return {name: getattr(self, name) for name in _SIGNATURE_FIELDS}

    @property
    def grid_size(self) -> int:
        return self.image_size // self.patch_size

    def split_seeds(self, split: str) -> range:
        try:
            start, count = {"train": self.train_seeds, "val": self.val_seeds, "test": self.test_seeds}[split]
        except KeyError as e:
            raise ConfigurationError(f"unknown split {split!r}; expected train, val or test") from e
        return range(start, start + count)

    def replace(self, **changes: Any) -> RunConfig:
        data = self.to_dict()
        data.update(changes)
        return RunConfig.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        for name in _TUPLE_FIELDS:
            data[name] = list(data[name])
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"unknown configuration keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str) -> RunConfig:
        try:
            with open(path) as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot read config {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigurationError(f"config {path} must hold a JSON object")
        return cls.from_dict(data)

    def save(self, path: str) -> str:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        return path
