"""Spectrogram features: log-power and phase images from complex series."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import get_window

from core.errors import ShapeError
from schemas.spectro_schema import SpectroConfig, WindowKind
from services.sigsim import FloatIq, IqSeries

STD_FLOOR = 1e-6


@dataclass(frozen=True)
class FeatureImage:
    log_power: np.ndarray
    phase: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.log_power.shape

    def channels(self, include_phase: bool = True) -> np.ndarray:
        if include_phase:
            return np.stack([self.log_power, self.phase])
        return self.log_power[np.newaxis]


def window_coefficients(cfg: SpectroConfig) -> np.ndarray:
    if cfg.window is WindowKind.none:
        return np.ones(cfg.cols)
    # periodic Hann: 0.5 * (1 - cos(2 pi n / C))
    return get_window("hann", cfg.cols, fftbins=True)


def _as_complex(x) -> np.ndarray:
    if isinstance(x, (IqSeries, FloatIq)):
        return x.to_complex()
    return np.asarray(x, dtype=np.complex128)


def spectrum(x, cfg: SpectroConfig) -> np.ndarray:
    """Row-wise windowed DFT of the series reshaped to rows x cols."""
    samples = _as_complex(x)
    if samples.ndim != 1 or samples.size != cfg.length:
        raise ShapeError(
            f"series length {samples.size} does not match {cfg.rows}x{cfg.cols} = {cfg.length}"
        )
    frames = samples.reshape(cfg.rows, cfg.cols) * window_coefficients(cfg)
    spec = np.fft.fft(frames, axis=1)
    if cfg.fftshift:
        spec = np.fft.fftshift(spec, axes=1)
    return spec


def power_spectrogram(x, cfg: SpectroConfig) -> np.ndarray:
    spec = spectrum(x, cfg)
    return spec.real ** 2 + spec.imag ** 2


def make_features(x, cfg: SpectroConfig) -> FeatureImage:
    spec = spectrum(x, cfg)
    power = spec.real ** 2 + spec.imag ** 2
    phase = np.angle(spec)
    phase[phase <= -np.pi] = np.pi
    return FeatureImage(log_power=np.log(power + cfg.epsilon), phase=phase)


def _standardize(channel: np.ndarray) -> np.ndarray:
    centered = channel - channel.mean()
    std = centered.std()
    return centered / max(std, STD_FLOOR)


def normalize(img: FeatureImage) -> FeatureImage:
    return FeatureImage(log_power=_standardize(img.log_power), phase=_standardize(img.phase))


def _block_mean(channel: np.ndarray, height: int, width: int) -> np.ndarray:
    rows, cols = channel.shape
    return channel.reshape(height, rows // height, width, cols // width).mean(axis=(1, 3))


def downsample(img: FeatureImage, height: int, width: int) -> FeatureImage:
    rows, cols = img.shape
    if not (0 < height <= rows and 0 < width <= cols) or rows % height or cols % width:
        raise ShapeError(f"cannot pool {rows}x{cols} into {height}x{width} blocks")
    if (height, width) == (rows, cols):
        return img
    return FeatureImage(
        log_power=_block_mean(img.log_power, height, width),
        phase=_block_mean(img.phase, height, width),
    )


def classifier_input(
    x,
    cfg: SpectroConfig,
    height: int,
    width: int,
    include_phase: bool = True,
) -> np.ndarray:
    """Feature tensor (channels, height, width) as float32."""
    img = normalize(downsample(make_features(x, cfg), height, width))
    return img.channels(include_phase).astype(np.float32)


def to_gray(channel: np.ndarray) -> np.ndarray:
    """Min-max scale to 0..255; the largest value renders white."""
    channel = np.asarray(channel, dtype=np.float64)
    low, high = channel.min(), channel.max()
    if high <= low:
        return np.zeros(channel.shape, dtype=np.uint8)
    scaled = (channel - low) / (high - low) * 255.0
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def render_pgm(channel: np.ndarray, path: str | Path) -> Path:
    gray = to_gray(channel)
    rows, cols = gray.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        handle.write(gray.tobytes())
    return path
