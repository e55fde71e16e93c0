"""Complex baseband test waveform synthesis and conditioning.

Carriers are OFDM-like random-QAM multitones: every FFT-grid bin inside the
occupied bandwidth gets an independent 16-QAM symbol, the inverse FFT of the
whole buffer is one cyclic-prefix-free symbol. Built that way the waveform is
*exactly* band-limited on its own grid (no symbol-joint splatter) while
keeping the ~10 dB PAPR of a Gaussian-like multitone, which is what drives a
polynomial PA into visible spectral regrowth.

All generation is deterministic per (spec, seed, n): one Generator per call,
no shared RNG state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError, DegenerateInputError

# 16-QAM rail levels, normalized to unit mean symbol energy.
_QAM16_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(10.0)


@dataclass(frozen=True)
class IqBuffer:
    """A contiguous run of complex baseband samples at a fixed sample rate.

    Samples are stored as complex64 (the processing precision of the whole
    toolkit); construction rejects non-finite values.
    """

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = np.ascontiguousarray(np.asarray(self.samples, dtype=np.complex64))
        object.__setattr__(self, "samples", samples)
        if self.sample_rate_hz <= 0:
            raise ConfigurationError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ConfigurationError("IqBuffer samples must be finite")

    def __len__(self) -> int:
        return self.samples.size

    def rms(self) -> float:
        """Root-mean-square amplitude, computed in double precision."""
        if not self.samples.size:
            return 0.0
        s = self.samples.astype(np.complex128)
        return float(np.sqrt(np.mean(s.real**2 + s.imag**2)))


@dataclass(frozen=True)
class CarrierSpec:
    """One carrier: baseband center offset, occupied bandwidth, relative power."""

    center_offset_hz: float
    bandwidth_hz: float
    power_db: float = 0.0

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ConfigurationError(f"bandwidth_hz must be positive, got {self.bandwidth_hz}")

    def check_fits(self, sample_rate_hz: float) -> None:
        """Raise unless the occupied band lies inside Nyquist."""
        edge = abs(self.center_offset_hz) + self.bandwidth_hz / 2.0
        if edge > sample_rate_hz / 2.0:
            raise ConfigurationError(
                f"carrier at {self.center_offset_hz} Hz with bandwidth {self.bandwidth_hz} Hz "
                f"exceeds Nyquist for fs={sample_rate_hz} Hz"
            )


def generate_carrier(
    spec: CarrierSpec, n_samples: int, sample_rate_hz: float, seed: int
) -> IqBuffer:
    """Synthesize one random-QAM multitone carrier.

    The carrier occupies [center − BW/2, center + BW/2] and has unit mean
    power before the spec's power_db scaling is applied.
    """
    if n_samples <= 0:
        raise ConfigurationError(f"n_samples must be positive, got {n_samples}")
    spec.check_fits(sample_rate_hz)

    rng = np.random.default_rng(seed)
    freqs = np.fft.fftfreq(n_samples, d=1.0 / sample_rate_hz)
    occupied = np.flatnonzero(np.abs(freqs) <= spec.bandwidth_hz / 2.0)
    # The DC bin always qualifies, so `occupied` is never empty.
    symbols = rng.choice(_QAM16_LEVELS, size=occupied.size) + 1j * rng.choice(
        _QAM16_LEVELS, size=occupied.size
    )

    spectrum = np.zeros(n_samples, dtype=np.complex128)
    spectrum[occupied] = symbols
    x = np.fft.ifft(spectrum)

    x /= np.sqrt(np.mean(x.real**2 + x.imag**2))  # unit mean power at baseband

    if spec.center_offset_hz != 0.0:
        # Double-precision phase ramp keeps drift below an ulp over long buffers.
        phase = (2.0 * np.pi * spec.center_offset_hz / sample_rate_hz) * np.arange(n_samples)
        x *= np.exp(1j * phase)

    x *= 10.0 ** (spec.power_db / 20.0)
    return IqBuffer(x.astype(np.complex64), sample_rate_hz)


def compose_multicarrier(
    specs: list[CarrierSpec], n_samples: int, sample_rate_hz: float, seed: int
) -> IqBuffer:
    """Sum several carriers (seed+index each) and renormalize to unit mean power."""
    if not specs:
        raise ConfigurationError("compose_multicarrier needs at least one CarrierSpec")
    for spec in specs:
        spec.check_fits(sample_rate_hz)

    total = np.zeros(n_samples, dtype=np.complex128)
    for i, spec in enumerate(specs):
        carrier = generate_carrier(spec, n_samples, sample_rate_hz, seed + i)
        total += carrier.samples.astype(np.complex128)

    power = np.mean(total.real**2 + total.imag**2)
    if power == 0.0:
        raise DegenerateInputError("composed waveform is all-zero")
    total /= np.sqrt(power)
    return IqBuffer(total.astype(np.complex64), sample_rate_hz)


def normalize_power(buf: IqBuffer, target_rms: float) -> IqBuffer:
    """Scale a buffer to an exact RMS amplitude.

    The scale factor is computed in double precision; a scale of exactly 1.0
    leaves the samples bit-identical.
    """
    if target_rms <= 0:
        raise ConfigurationError(f"target_rms must be positive, got {target_rms}")
    if len(buf) == 0:
        raise DegenerateInputError("cannot normalize an empty buffer")
    current = buf.rms()
    if current == 0.0:
        raise DegenerateInputError("cannot normalize an all-zero buffer")
    scale = target_rms / current  # python float: complex64 * weak scalar stays complex64
    return IqBuffer(buf.samples * scale, buf.sample_rate_hz)
