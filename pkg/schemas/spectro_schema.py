from enum import Enum

from pydantic import BaseModel, Field

from core.config import SIGNAL_LENGTH


class WindowKind(str, Enum):
    hanning = "hanning"
    none = "none"


class SpectroConfig(BaseModel):
    rows: int = Field(default=384, gt=0)
    cols: int = Field(default=512, gt=0)
    epsilon: float = Field(default=1e-12, gt=0)
    window: WindowKind = WindowKind.hanning
    fftshift: bool = True

    @property
    def length(self) -> int:
        return self.rows * self.cols

    def check_length(self, length: int = SIGNAL_LENGTH) -> None:
        if self.length != length:
            raise ValueError(f"rows*cols = {self.length} does not match series length {length}")
