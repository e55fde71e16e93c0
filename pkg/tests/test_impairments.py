"""Transmitter chain models, checked against hand-computed values."""

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from aphdpd import (
    IDEAL_MODULATOR,
    ConfigurationError,
    IqBuffer,
    IqModulatorModel,
    PaModel,
    TxChain,
    iq_modulate,
    pa_evaluate,
    run_tx_chain,
)

REF_PA = PaModel(
    alpha1=0.9490 - 0.0197j,
    alpha3=0.4885 + 0.1071j,
    alpha5=-1.0156 - 0.0474j,
)


class TestPaModel:
    def test_unit_input(self):
        # sum of the three alphas: (0.9490+0.4885-1.0156) + (-0.0197+0.1071-0.0474)j
        assert pa_evaluate(1.0, REF_PA) == pytest.approx(0.4219 + 0.0400j, abs=1e-6)

    def test_small_signal(self):
        got = pa_evaluate(0.1, REF_PA)
        want = 0.1 * (REF_PA.alpha1 + 0.01 * REF_PA.alpha3 + 1e-4 * REF_PA.alpha5)
        assert got == pytest.approx(want, abs=1e-12)
        assert got == pytest.approx(0.0953783 - 0.0018634j, abs=1e-6)

    def test_array_elementwise(self, rng):
        x = rng.normal(size=200) + 1j * rng.normal(size=200)
        y = pa_evaluate(x, REF_PA)
        for i in (0, 77, 199):
            assert y[i] == pytest.approx(pa_evaluate(complex(x[i]), REF_PA))

    def test_odd_symmetry(self, rng):
        x = 0.3 * (rng.normal(size=64) + 1j * rng.normal(size=64))
        assert_allclose(pa_evaluate(-x, REF_PA), -pa_evaluate(x, REF_PA), rtol=1e-12)

    def test_linear_pa_is_scaling(self, rng):
        x = rng.normal(size=64) + 1j * rng.normal(size=64)
        assert_allclose(pa_evaluate(x, PaModel(alpha1=2.0 - 1.0j)), (2.0 - 1.0j) * x, rtol=1e-12)

    def test_zero_alpha1_rejected(self):
        with pytest.raises(ConfigurationError):
            PaModel(alpha1=0.0)


class TestIqModulator:
    def test_mixing_coefficients(self):
        m = IqModulatorModel(gain_imbalance_db=1.0, phase_imbalance_deg=5.0)
        g = 10.0 ** (1.0 / 20.0)
        rot = np.exp(1j * np.deg2rad(5.0))
        assert m.k1 == pytest.approx((1 + g * rot) / 2, abs=1e-15)
        assert m.k2 == pytest.approx((1 - g * rot) / 2, abs=1e-15)
        assert m.k1 + m.k2 == pytest.approx(1.0, abs=1e-15)

    def test_ideal_modulator_is_identity(self, rng):
        x = rng.normal(size=100) + 1j * rng.normal(size=100)
        assert IDEAL_MODULATOR.is_ideal
        assert_allclose(iq_modulate(x, IDEAL_MODULATOR), x, rtol=0, atol=0)

    def test_not_ideal_with_leakage(self):
        assert not IqModulatorModel(lo_leakage=0.0112 + 0.0112j).is_ideal

    def test_leakage_shifts_output(self):
        m = IqModulatorModel(lo_leakage=0.25 - 0.125j)
        assert iq_modulate(0.0, m) == pytest.approx(0.25 - 0.125j)

    def test_image_term(self):
        """Pure phase imbalance puts energy on conj(x)."""
        m = IqModulatorModel(phase_imbalance_deg=10.0)
        got = iq_modulate(1j, m)
        want = m.k1 * 1j + m.k2 * (-1j)
        assert got == pytest.approx(want, abs=1e-15)
        assert abs(m.k2) > 0


class TestTxChain:
    def test_composition_order(self, rng):
        x = 0.3 * (rng.normal(size=500) + 1j * rng.normal(size=500))
        buf = IqBuffer(x.astype(np.complex64), 61.44e6)
        chain = TxChain(
            modulator=IqModulatorModel(1.0, 5.0, 0.0112 + 0.0112j),
            pa=REF_PA,
        )
        got = run_tx_chain(buf, chain)
        want = pa_evaluate(iq_modulate(buf.samples, chain.modulator), chain.pa)
        assert_allclose(got.samples, want.astype(np.complex64), rtol=1e-6)
        assert got.sample_rate_hz == buf.sample_rate_hz

    def test_ideal_linear_chain_passthrough(self, rng):
        x = (0.1 * (rng.normal(size=100) + 1j * rng.normal(size=100))).astype(np.complex64)
        chain = TxChain(modulator=IDEAL_MODULATOR, pa=PaModel(alpha1=1.0))
        out = run_tx_chain(IqBuffer(x, 1e6), chain)
        assert_allclose(out.samples, x, rtol=1e-7)
