from pydantic import BaseModel, Field, field_validator, model_validator

from schemas.signal_schema import NUM_CLASSES

# name -> (depth, widen)
WRN_PRESETS: dict[str, tuple[int, int]] = {
    "wrn-10-1": (10, 1),
    "wrn-16-8": (16, 8),
    "wrn-28-10": (28, 10),
    "wrn-34-2": (34, 2),
}


class WrnConfig(BaseModel):
    depth: int = 10
    widen: int = Field(default=1, ge=1)
    dropout: float = Field(default=0.3, ge=0, lt=1)
    in_channels: int = Field(default=2, ge=1, le=2)
    classes: int = Field(default=NUM_CLASSES, ge=2)
    input_h: int = Field(default=96, gt=0)
    input_w: int = Field(default=128, gt=0)

    @field_validator("depth")
    @classmethod
    def _depth_is_6b_plus_4(cls, depth: int) -> int:
        if depth < 10 or (depth - 4) % 6 != 0:
            raise ValueError(f"depth must be 6b+4 with b >= 1, got {depth}")
        return depth

    @property
    def blocks_per_group(self) -> int:
        return (self.depth - 4) // 6

    @property
    def include_phase(self) -> bool:
        return self.in_channels == 2

    @classmethod
    def preset(cls, name: str, **overrides) -> "WrnConfig":
        if name not in WRN_PRESETS:
            raise ValueError(f"unknown architecture '{name}', expected one of {sorted(WRN_PRESETS)}")
        depth, widen = WRN_PRESETS[name]
        return cls(depth=depth, widen=widen, **overrides)


class TrainConfig(BaseModel):
    lr: float = Field(default=0.1, ge=0)
    lr_decay: float = Field(default=0.2, gt=0, le=1)
    decay_epochs: list[int] | None = None
    momentum: float = Field(default=0.9, ge=0, lt=1)
    weight_decay: float = Field(default=5e-4, ge=0)
    batch_size: int = Field(default=64, ge=1)
    epochs: int = Field(default=30, ge=1)
    seed: int = Field(default=0, ge=0)
    augmentation: str = "none"

    @field_validator("augmentation")
    @classmethod
    def _no_augmentation(cls, value: str) -> str:
        if value != "none":
            raise ValueError("only augmentation 'none' is supported")
        return value

    @property
    def milestones(self) -> list[int]:
        if self.decay_epochs is not None:
            return sorted(self.decay_epochs)
        return sorted({max(1, round(0.4 * self.epochs)), max(1, round(0.7 * self.epochs))})


class FoldAssignment(BaseModel):
    train_splits: set[str]
    val_splits: set[str] = Field(default_factory=set)

    @model_validator(mode="after")
    def _disjoint(self):
        if not self.train_splits:
            raise ValueError("at least one training split is required")
        overlap = self.train_splits & self.val_splits
        if overlap:
            raise ValueError(f"train and validation splits overlap: {sorted(overlap)}")
        return self


class EpochRecord(BaseModel):
    epoch: int
    train_loss: float
    val_acc: float
