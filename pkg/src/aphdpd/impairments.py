"""Simulated transmitter analog chain.

Two impairments, composed in fixed order: an I/Q modulator with gain/phase
imbalance and LO leakage, then a memoryless odd-order polynomial PA

    pa(v) = alpha1*v + alpha3*|v|^2*v + alpha5*|v|^4*v.

The modulator uses the standard two-mixing-coefficient model

    mod(x) = K1*x + K2*conj(x) + lo_leakage,
    K1 = (1 + g*exp(j*phi))/2,   K2 = (1 - g*exp(j*phi))/2,

with g the linear gain imbalance and phi the phase imbalance: the conj(x)
image and the constant leakage are exactly the terms the predistorter's
conjugate branches and constant offset exist to cancel.

All evaluation is pure, elementwise, and double precision internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError
from .waveforms import IqBuffer


@dataclass(frozen=True)
class PaModel:
    """Memoryless polynomial power amplifier with odd-order terms 1, 3, 5."""

    alpha1: complex
    alpha3: complex = 0.0
    alpha5: complex = 0.0

    def __post_init__(self):
        if self.alpha1 == 0:
            raise ConfigurationError("alpha1 must be nonzero (invertible small-signal gain)")


@dataclass(frozen=True)
class IqModulatorModel:
    gain_imbalance_db: float = 0.0
    phase_imbalance_deg: float = 0.0
    lo_leakage: complex = 0.0

    @property
    def k1(self) -> complex:
        g = 10.0 ** (self.gain_imbalance_db / 20.0)
        return (1.0 + g * np.exp(1j * np.deg2rad(self.phase_imbalance_deg))) / 2.0

    @property
    def k2(self) -> complex:
        g = 10.0 ** (self.gain_imbalance_db / 20.0)
        return (1.0 - g * np.exp(1j * np.deg2rad(self.phase_imbalance_deg))) / 2.0

    @property
    def is_ideal(self) -> bool:
        return (
            self.gain_imbalance_db == 0.0
            and self.phase_imbalance_deg == 0.0
            and self.lo_leakage == 0.0
        )


IDEAL_MODULATOR = IqModulatorModel()


@dataclass(frozen=True)
class TxChain:
    """Modulator first, then PA — composition order is part of the contract."""

    modulator: IqModulatorModel
    pa: PaModel


def pa_evaluate(x, pa: PaModel):
    """alpha1*x + alpha3*|x|^2*x + alpha5*|x|^4*x (scalar or array)."""
    x = np.asarray(x, dtype=np.complex128)
    r2 = x.real**2 + x.imag**2
    y = (pa.alpha1 + pa.alpha3 * r2 + pa.alpha5 * r2 * r2) * x
    return complex(y) if y.ndim == 0 else y


def iq_modulate(x, m: IqModulatorModel):
    """K1*x + K2*conj(x) + lo_leakage (scalar or array)."""
    x = np.asarray(x, dtype=np.complex128)
    y = m.k1 * x + m.k2 * np.conj(x) + m.lo_leakage
    return complex(y) if y.ndim == 0 else y


def run_tx_chain(x: IqBuffer, chain: TxChain) -> IqBuffer:
    """Push a buffer through modulator + PA, elementwise."""
    v = iq_modulate(x.samples, chain.modulator)
    out = pa_evaluate(v, chain.pa)
    return IqBuffer(np.asarray(out, dtype=np.complex64), x.sample_rate_hz)
