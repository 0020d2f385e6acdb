from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.config import NOISE_SIGMA, SIGNAL_LENGTH


class SignalClass(str, Enum):
    brightpixel = "brightpixel"
    narrowband = "narrowband"
    narrowbanddrd = "narrowbanddrd"
    noise = "noise"
    squarepulsednarrowband = "squarepulsednarrowband"
    squiggle = "squiggle"
    squigglesquarepulsednarrowband = "squigglesquarepulsednarrowband"

    @property
    def code(self) -> int:
        return CLASS_ORDER.index(self)

    @classmethod
    def from_code(cls, code: int) -> "SignalClass":
        return CLASS_ORDER[int(code)]


CLASS_ORDER: tuple[SignalClass, ...] = tuple(sorted(SignalClass, key=lambda c: c.value))
NUM_CLASSES = len(CLASS_ORDER)

# Which modulation terms each class switches on
DRIFT_DERIVATIVE_CLASSES = {SignalClass.narrowbanddrd}
SQUIGGLE_CLASSES = {SignalClass.squiggle, SignalClass.squigglesquarepulsednarrowband}
PULSED_CLASSES = {SignalClass.squarepulsednarrowband, SignalClass.squigglesquarepulsednarrowband}

# pulse offset phi_w as a fraction of L
PHASE_WINDOW_FRACTION = (0.07, 0.93)


class PhaseMode(str, Enum):
    literal = "literal"
    accumulate = "accumulate"


class SimParams(BaseModel):
    model_config = ConfigDict(populate_by_name=True, frozen=True)

    signal_class: SignalClass = Field(alias="class")
    A0: float = Field(ge=0)
    omega0: float
    omega1: float
    omega1dot: float = 0.0
    B: float = Field(default=0.0, ge=0)
    T: float = Field(default=float(SIGNAL_LENGTH), gt=0)
    D: float = Field(default=1.0, ge=0, le=1)
    phi_w: float = 0.5 * SIGNAL_LENGTH
    phi: float = 0.0
    seed: int = Field(default=0, ge=0, lt=1 << 64)
    L: int = Field(default=SIGNAL_LENGTH, gt=0)
    sigma: float = Field(default=NOISE_SIGMA, ge=0)

    @model_validator(mode="before")
    @classmethod
    def _centre_pulse_offset(cls, data):
        if isinstance(data, dict) and "phi_w" not in data:
            data = {**data, "phi_w": 0.5 * data.get("L", SIGNAL_LENGTH)}
        return data

    @model_validator(mode="after")
    def _check_class_constraints(self):
        if self.T > self.L:
            raise ValueError("square-wave period T must not exceed L")
        low, high = PHASE_WINDOW_FRACTION
        if not low * self.L <= self.phi_w <= high * self.L:
            raise ValueError(f"phi_w must lie in [{low} L, {high} L], got {self.phi_w}")
        cls = self.signal_class
        if cls is SignalClass.noise:
            if self.A0 != 0:
                raise ValueError("noise class requires A0 = 0")
            return self
        if cls not in DRIFT_DERIVATIVE_CLASSES and self.omega1dot != 0:
            raise ValueError(f"{cls.value} requires omega1dot = 0")
        if cls not in SQUIGGLE_CLASSES and self.B != 0:
            raise ValueError(f"{cls.value} requires B = 0")
        if cls not in PULSED_CLASSES and self.T != self.L:
            raise ValueError(f"{cls.value} requires T = L")
        if cls not in PULSED_CLASSES and cls is not SignalClass.brightpixel and self.D != 1.0:
            raise ValueError(f"{cls.value} requires D = 1")
        return self

    @property
    def amplitude_ratio(self) -> float:
        return self.A0 / NOISE_SIGMA
