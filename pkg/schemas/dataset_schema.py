from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from schemas.signal_schema import CLASS_ORDER, PhaseMode, SignalClass, SimParams

FIXED_SPLITS = {"train", "test", "sweep"}


def fold_name(index: int) -> str:
    return f"fold_{index}"


def fold_index(split: str) -> int | None:
    if split.startswith("fold_") and split[5:].isdigit():
        return int(split[5:])
    return None


class ManifestRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    id: str = Field(min_length=1)
    signal_class: SignalClass = Field(alias="class")
    params: SimParams
    file: str
    split: str
    sweep_amplitude: float | None = None

    @field_validator("split")
    @classmethod
    def _known_split(cls, value: str) -> str:
        if value not in FIXED_SPLITS and fold_index(value) is None:
            raise ValueError(f"unknown split '{value}'")
        return value

    @model_validator(mode="after")
    def _class_matches_params(self):
        if self.params.signal_class is not self.signal_class:
            raise ValueError(f"record {self.id}: class does not match params.class")
        return self

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True)


Manifest = list[ManifestRecord]


class CorpusSpec(BaseModel):
    counts: dict[SignalClass, int] = Field(default_factory=dict)
    master_seed: int = Field(default=0, ge=0)
    phase_mode: PhaseMode = PhaseMode.accumulate
    out_dir: Path
    split: str = "train"

    @field_validator("counts")
    @classmethod
    def _non_negative(cls, value: dict[SignalClass, int]) -> dict[SignalClass, int]:
        for signal_class, count in value.items():
            if count < 0:
                raise ValueError(f"count for {signal_class.value} must be >= 0")
        return value

    @field_validator("split")
    @classmethod
    def _corpus_split(cls, value: str) -> str:
        if value not in {"train", "test"}:
            raise ValueError("corpus split must be 'train' or 'test'")
        return value

    @classmethod
    def uniform(cls, per_class: int, classes=CLASS_ORDER, **kwargs) -> "CorpusSpec":
        return cls(counts={c: per_class for c in classes}, **kwargs)
