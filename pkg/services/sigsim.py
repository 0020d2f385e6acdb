"""Labeled narrowband signal simulator.

One call produces one complex time series

    s(t) = A(t) * exp(i * Phi(t)) + n(t)

with A(t) a square-wave gated amplitude, Phi(t) the carrier phase built
from a drifting, optionally random-walking frequency track, and n(t)
complex white Gaussian noise. Results are quantized to signed 8-bit I/Q.
"""

from dataclasses import dataclass

import numpy as np
import structlog

from core.config import NOISE_SIGMA, SIGNAL_LENGTH
from core.errors import InvalidParameterError
from core.rng import NOISE_STREAM, PARAMS_STREAM, WALK_STREAM, stream
from schemas.signal_schema import (
    DRIFT_DERIVATIVE_CLASSES,
    PHASE_WINDOW_FRACTION,
    PULSED_CLASSES,
    SQUIGGLE_CLASSES,
    PhaseMode,
    SignalClass,
    SimParams,
)

logger = structlog.get_logger(__name__)

TWO_PI = 2.0 * np.pi

# Sampling ranges, amplitudes as A0 / 13.0
AMPLITUDE_RANGES: dict[SignalClass, tuple[float, float]] = {
    SignalClass.narrowband: (0.05, 0.4),
    SignalClass.narrowbanddrd: (0.05, 0.4),
    SignalClass.squiggle: (0.1, 0.5),
    SignalClass.squarepulsednarrowband: (0.05, 0.4),
    SignalClass.squigglesquarepulsednarrowband: (0.1, 0.5),
    SignalClass.brightpixel: (0.05, 0.75),
}
OMEGA0_RANGE = (-TWO_PI / 3.0, TWO_PI / 3.0)
OMEGA1_RANGE = (-7.324e-6, 7.324e-6)
OMEGA1DOT_MAGNITUDE = (1e-8, 8e-8)
SQUIGGLE_RANGE = (0.0001, 0.005)
PERIOD_FRACTION_RANGE = (0.15625, 0.46875)
DUTY_RANGES: dict[SignalClass, tuple[float, float]] = {
    SignalClass.squarepulsednarrowband: (0.05, 0.9),
    SignalClass.squigglesquarepulsednarrowband: (0.15, 0.8),
    SignalClass.brightpixel: (0.0078125, 0.03125),
}


@dataclass(frozen=True)
class FloatIq:
    re: np.ndarray
    im: np.ndarray

    def __len__(self) -> int:
        return len(self.re)

    def to_complex(self) -> np.ndarray:
        return self.re + 1j * self.im


@dataclass(frozen=True)
class IqSeries:
    re: np.ndarray
    im: np.ndarray

    def __len__(self) -> int:
        return len(self.re)

    def to_complex(self) -> np.ndarray:
        return self.re.astype(np.float64) + 1j * self.im.astype(np.float64)


def sample_params(
    signal_class: SignalClass,
    rng: np.random.Generator,
    seed: int = 0,
    amplitude: float | None = None,
    length: int = SIGNAL_LENGTH,
    sigma: float = NOISE_SIGMA,
) -> SimParams:
    """Draw one parameter set for ``signal_class``.

    Every call consumes the same number of draws whatever the class, so a
    stream position never depends on the label. ``amplitude`` (A0 / 13.0)
    overrides the sampled amplitude for every class but noise.
    """
    u_amp = rng.uniform(0.0, 1.0)
    omega0 = rng.uniform(*OMEGA0_RANGE)
    omega1 = rng.uniform(*OMEGA1_RANGE)
    phi = rng.uniform(0.0, TWO_PI)
    phi_w = rng.uniform(PHASE_WINDOW_FRACTION[0] * length, PHASE_WINDOW_FRACTION[1] * length)
    drd_magnitude = rng.uniform(*OMEGA1DOT_MAGNITUDE)
    drd_negative = rng.uniform(0.0, 1.0) < 0.5
    squiggle = rng.uniform(*SQUIGGLE_RANGE)
    period_fraction = rng.uniform(*PERIOD_FRACTION_RANGE)
    u_duty = rng.uniform(0.0, 1.0)

    if signal_class is SignalClass.noise:
        a0 = 0.0
    elif amplitude is not None:
        a0 = NOISE_SIGMA * float(amplitude)
    else:
        low, high = AMPLITUDE_RANGES[signal_class]
        a0 = NOISE_SIGMA * (low + (high - low) * u_amp)

    omega1dot = 0.0
    if signal_class in DRIFT_DERIVATIVE_CLASSES:
        omega1dot = -drd_magnitude if drd_negative else drd_magnitude

    b = squiggle if signal_class in SQUIGGLE_CLASSES else 0.0

    period = float(length)
    duty = 1.0
    if signal_class in PULSED_CLASSES:
        period = float(round(period_fraction * length))
    if signal_class in DUTY_RANGES:
        low, high = DUTY_RANGES[signal_class]
        duty = low + (high - low) * u_duty

    return SimParams(
        signal_class=signal_class,
        A0=a0,
        omega0=omega0,
        omega1=omega1,
        omega1dot=omega1dot,
        B=b,
        T=period,
        D=duty,
        phi_w=phi_w,
        phi=phi,
        seed=seed,
        L=length,
        sigma=sigma,
    )


def square_wave(t, T: float, D: float, phi_w: float):
    """W(t | T, D, phi_w): 1 while ((t - phi_w) mod T) < D * T, else 0."""
    if not T > 0:
        raise InvalidParameterError(f"square-wave period must be positive, got T={T}")
    if not 0.0 <= D <= 1.0:
        raise InvalidParameterError(f"duty cycle must lie in [0, 1], got D={D}")

    t = np.asarray(t, dtype=np.float64)
    if D >= 1.0:
        on = np.ones(t.shape, dtype=np.int8)
    elif D <= 0.0:
        on = np.zeros(t.shape, dtype=np.int8)
    else:
        on = (np.mod(t - phi_w, T) < D * T).astype(np.int8)
    return int(on) if on.ndim == 0 else on


def frequency_trajectory(params: SimParams, rng: np.random.Generator) -> np.ndarray:
    """Instantaneous frequency omega(t) in rad/sample for t = 0..L-1."""
    t = np.arange(params.L, dtype=np.float64)
    omega = params.omega0 + (params.omega1 + params.omega1dot * t) * t
    if params.B != 0:
        omega = omega + params.B * np.cumsum(rng.uniform(-1.0, 1.0, params.L))
    return omega


def _accumulated_phase(params: SimParams, omega: np.ndarray) -> np.ndarray:
    # Sum of omega(0..t). Polynomial terms use closed forms so long records
    # keep sub-nanoradian phase accuracy; only the random walk is summed.
    t = np.arange(params.L, dtype=np.float64)
    polynomial = (
        params.omega0 * (t + 1.0)
        + params.omega1 * (t * (t + 1.0) / 2.0)
        + params.omega1dot * (t * (t + 1.0) * (2.0 * t + 1.0) / 6.0)
    )
    phase = params.phi + polynomial
    if params.B != 0:
        t_poly = params.omega0 + (params.omega1 + params.omega1dot * t) * t
        phase = phase + np.cumsum(omega - t_poly)
    return phase


def aliasing_onset(omega: np.ndarray) -> int | None:
    """First sample whose frequency leaves [-pi, pi], or None."""
    outside = (omega > np.pi) | (omega < -np.pi)
    if not outside.any():
        return None
    return int(np.argmax(outside))


def synthesize(params: SimParams, phase_mode: PhaseMode = PhaseMode.accumulate) -> FloatIq:
    phase_mode = PhaseMode(phase_mode)
    t = np.arange(params.L, dtype=np.float64)

    omega = frequency_trajectory(params, stream(params.seed, WALK_STREAM))
    amplitude = params.A0 * square_wave(t, params.T, params.D, params.phi_w).astype(np.float64)

    onset = aliasing_onset(omega)
    if onset is not None:
        amplitude[onset:] = 0.0

    if phase_mode is PhaseMode.accumulate:
        phase = _accumulated_phase(params, omega)
    else:
        phase = omega * t + params.phi

    signal = amplitude * np.exp(1j * phase)

    noise = stream(params.seed, NOISE_STREAM).standard_normal((2, params.L)) * params.sigma
    return FloatIq(re=signal.real + noise[0], im=signal.imag + noise[1])


def quantize(x: FloatIq) -> IqSeries:
    def _to_int8(values: np.ndarray) -> np.ndarray:
        rounded = np.sign(values) * np.floor(np.abs(values) + 0.5)
        return np.clip(rounded, -128, 127).astype(np.int8)

    return IqSeries(re=_to_int8(np.asarray(x.re)), im=_to_int8(np.asarray(x.im)))


def simulate(
    signal_class: SignalClass,
    seed: int,
    phase_mode: PhaseMode = PhaseMode.accumulate,
    amplitude: float | None = None,
    length: int = SIGNAL_LENGTH,
    sigma: float = NOISE_SIGMA,
) -> tuple[SimParams, IqSeries]:
    params = sample_params(
        signal_class,
        stream(seed, PARAMS_STREAM),
        seed=seed,
        amplitude=amplitude,
        length=length,
        sigma=sigma,
    )
    return params, quantize(synthesize(params, phase_mode))


def instantaneous_frequency_slope(
    params: SimParams,
    cols: int,
    phase_mode: PhaseMode = PhaseMode.accumulate,
) -> float:
    """Drift of the tone across a spectrogram with ``cols`` bins, in bins per row.

    Valid for tracks without drift derivative or random walk.
    """
    slope = params.omega1 * cols * cols / TWO_PI
    if PhaseMode(phase_mode) is PhaseMode.literal:
        slope *= 2.0
    return slope
