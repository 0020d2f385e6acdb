from pydantic import BaseModel, Field, field_validator

from schemas.signal_schema import SignalClass


class DetectorConfig(BaseModel):
    max_drift: float = Field(default=1.0, ge=0)
    steps: int = Field(default=257, ge=1)
    threshold: float | None = None


class DriftDetection(BaseModel):
    score: float = Field(ge=0)
    # un-normalized power of the strongest line; the normalized score shares its argmax
    raw_score: float = 0.0
    start_bin: int = Field(ge=0)
    drift: float
    detected: bool = False
    threshold: float | None = None


class DetectionLine(BaseModel):
    id: str
    score: float
    drift: float
    start_bin: int
    detected: bool


class ClassScore(BaseModel):
    signal_class: SignalClass
    n: int = Field(ge=0)
    precision: float = Field(ge=0, le=1)
    recall: float = Field(ge=0, le=1)
    f1: float = Field(ge=0, le=1)


class ClassReport(BaseModel):
    classes: list[ClassScore]
    macro_f1: float = Field(ge=0, le=1)
    accuracy: float = Field(ge=0, le=1)

    def score_for(self, signal_class: SignalClass) -> ClassScore:
        return next(s for s in self.classes if s.signal_class is signal_class)


class SweepPoint(BaseModel):
    amplitude: float
    n: int
    loss: float
    accuracy: float
    noise_fraction: float
    f1: dict[SignalClass, float]


class SweepReport(BaseModel):
    points: list[SweepPoint]

    @field_validator("points")
    @classmethod
    def _increasing(cls, points: list[SweepPoint]) -> list[SweepPoint]:
        amplitudes = [p.amplitude for p in points]
        if any(b <= a for a, b in zip(amplitudes, amplitudes[1:])):
            raise ValueError("sweep amplitudes must be strictly increasing")
        return points

    @property
    def amplitudes(self) -> list[float]:
        return [p.amplitude for p in self.points]
