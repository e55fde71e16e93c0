"""Binary I/Q file round trips and sidecar validation."""

from __future__ import annotations

import json

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from aphdpd import ConfigurationError, IqBuffer, read_iq, write_iq
from aphdpd.iqfile import sidecar_path


def _buf(n=257, fs=61.44e6, seed=1):
    rng = np.random.default_rng(seed)
    x = (rng.normal(size=n) + 1j * rng.normal(size=n)).astype(np.complex64)
    return IqBuffer(x, fs)


def test_round_trip_bits(tmp_path):
    buf = _buf()
    path = tmp_path / "a.iq"
    write_iq(buf, path)
    back = read_iq(path)
    assert_array_equal(back.samples.view(np.float32), buf.samples.view(np.float32))
    assert back.sample_rate_hz == buf.sample_rate_hz


def test_interleaved_float32_layout(tmp_path):
    buf = _buf(n=5)
    path = tmp_path / "a.iq"
    write_iq(buf, path)
    raw = np.fromfile(path, dtype="<f4")
    assert raw.size == 10
    assert_array_equal(raw[0::2], buf.samples.real)
    assert_array_equal(raw[1::2], buf.samples.imag)


def test_file_size_is_8_bytes_per_sample(tmp_path):
    path = tmp_path / "a.iq"
    write_iq(_buf(n=1000), path)
    assert path.stat().st_size == 8000


def test_sidecar_contents(tmp_path):
    path = tmp_path / "a.iq"
    write_iq(_buf(n=42, fs=10e6), path)
    doc = json.loads(sidecar_path(path).read_text())
    assert doc == {"sample_rate_hz": 10e6, "n_samples": 42}


def test_truncated_file_rejected(tmp_path):
    path = tmp_path / "a.iq"
    write_iq(_buf(n=10), path)
    with open(path, "r+b") as fh:
        fh.truncate(77)  # not a multiple of 8
    with pytest.raises(ConfigurationError):
        read_iq(path)


def test_sidecar_count_mismatch_rejected(tmp_path):
    path = tmp_path / "a.iq"
    write_iq(_buf(n=10), path)
    side = sidecar_path(path)
    doc = json.loads(side.read_text())
    doc["n_samples"] = 11
    side.write_text(json.dumps(doc))
    with pytest.raises(ConfigurationError):
        read_iq(path)


def test_missing_sidecar_needs_explicit_rate(tmp_path):
    path = tmp_path / "a.iq"
    buf = _buf(n=16, fs=5e6)
    write_iq(buf, path, sidecar=False)
    with pytest.raises(ConfigurationError):
        read_iq(path)
    back = read_iq(path, sample_rate_hz=5e6)
    assert back.sample_rate_hz == 5e6
    assert_array_equal(back.samples, buf.samples)


def test_rate_contradiction_rejected(tmp_path):
    path = tmp_path / "a.iq"
    write_iq(_buf(fs=5e6), path)
    with pytest.raises(ConfigurationError):
        read_iq(path, sample_rate_hz=6e6)
