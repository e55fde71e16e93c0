"""Binary I/Q file I/O.

Repo-wide format: little-endian 32-bit floats, interleaved I,Q,I,Q,...
with an optional sidecar JSON (`<path>.json`) carrying
{"sample_rate_hz": <number>, "n_samples": <number>}.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .exceptions import ConfigurationError
from .waveforms import IqBuffer


def sidecar_path(path: str | Path) -> Path:
    return Path(str(path) + ".json")


def write_iq(buf: IqBuffer, path: str | Path, sidecar: bool = True) -> None:
    """Write a buffer as interleaved little-endian float32 I/Q pairs."""
    path = Path(path)
    interleaved = np.empty(2 * len(buf), dtype="<f4")
    interleaved[0::2] = buf.samples.real
    interleaved[1::2] = buf.samples.imag
    path.write_bytes(interleaved.tobytes())
    if sidecar:
        meta = {"sample_rate_hz": buf.sample_rate_hz, "n_samples": len(buf)}
        sidecar_path(path).write_text(json.dumps(meta) + "\n")


def read_iq(path: str | Path, sample_rate_hz: float | None = None) -> IqBuffer:
    """Read an interleaved float32 I/Q file.

    The sample rate comes from the sidecar JSON when present; otherwise the
    caller must supply it.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) % 8:
        raise ConfigurationError(
            f"{path}: size {len(raw)} is not a whole number of complex64 samples"
        )

    meta_file = sidecar_path(path)
    if meta_file.exists():
        meta = json.loads(meta_file.read_text())
        rate = float(meta["sample_rate_hz"])
        n_declared = int(meta.get("n_samples", len(raw) // 8))
        if n_declared != len(raw) // 8:
            raise ConfigurationError(
                f"{path}: sidecar declares {n_declared} samples, file holds {len(raw) // 8}"
            )
        if sample_rate_hz is not None and sample_rate_hz != rate:
            raise ConfigurationError(
                f"{path}: sidecar sample rate {rate} contradicts requested {sample_rate_hz}"
            )
    elif sample_rate_hz is not None:
        rate = sample_rate_hz
    else:
        raise ConfigurationError(f"{path}: no sidecar JSON and no sample_rate_hz given")

    interleaved = np.frombuffer(raw, dtype="<f4")
    samples = np.empty(len(raw) // 8, dtype=np.complex64)
    samples.real = interleaved[0::2]
    samples.imag = interleaved[1::2]
    return IqBuffer(samples, rate)
