"""Branch polynomial basis: construction, fitting, evaluation, regression matrix.

The orthogonal-fit checks compare against a from-scratch Gram-Schmidt
orthonormalization (tests/conftest.py) rather than against the package's
own Cholesky construction.
"""

from __future__ import annotations

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from aphdpd import (
    BranchSets,
    ConditioningError,
    ConfigurationError,
    InsufficientDataError,
    IqBuffer,
    PolyBasis,
    build_basis_matrix,
    evaluate_branch,
    fit_orthogonal_basis,
)
from conftest import gram_schmidt_basis_rows

TABLE_SETS = BranchSets.odd_orders_up_to(5, 3)


def _training_buffer(n=4000, seed=2, rms=0.2):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    x *= rms / np.sqrt(np.mean(np.abs(x) ** 2))
    return IqBuffer(x.astype(np.complex64), 61.44e6)


class TestBranchSets:
    def test_odd_orders_up_to(self):
        assert TABLE_SETS.main_orders == (1, 3, 5)
        assert TABLE_SETS.conj_orders == (1, 3)
        assert TABLE_SETS.n_branches == 5

    @pytest.mark.parametrize(
        "main,conj",
        [((1, 2), (1,)), ((3, 1), (1,)), ((1, 3), (1, 3, 5)), ((), (1,)), ((1, 1), (1,))],
    )
    def test_invalid_sets_rejected(self, main, conj):
        with pytest.raises(ConfigurationError):
            BranchSets(main, conj)


class TestPolyBasis:
    def test_plain_is_identity_table(self):
        basis = PolyBasis.plain(TABLE_SETS)
        assert basis.mode == "plain"
        for order, row in basis.u_main.items():
            assert row[-1] == 1.0
            assert np.all(row[:-1] == 0.0)

    def test_zero_diagonal_rejected(self):
        sets = BranchSets((1, 3), (1,))
        with pytest.raises(ConfigurationError):
            PolyBasis("plain", sets, {1: [1.0], 3: [0.5, 0.0]}, {1: [1.0]})

    def test_json_round_trip(self):
        basis = fit_orthogonal_basis(_training_buffer(), TABLE_SETS)
        doc = json.loads(json.dumps(basis.to_json_dict()))
        back = PolyBasis.from_json_dict(doc)
        assert back.mode == basis.mode
        assert back.sets == basis.sets
        for order in TABLE_SETS.main_orders:
            assert_allclose(back.u_main[order], basis.u_main[order], rtol=0, atol=0)

    def test_json_rejects_complex_coefficients(self):
        doc = PolyBasis.plain(TABLE_SETS).to_json_dict()
        doc["u_main"][0][0] = [1.0, 0.5]
        with pytest.raises(ConfigurationError):
            PolyBasis.from_json_dict(doc)


class TestEvaluateBranch:
    def test_plain_monomial_p5(self):
        basis = PolyBasis.plain(TABLE_SETS)
        assert evaluate_branch(2 + 0j, 5, False, basis) == pytest.approx(32 + 0j)

    def test_plain_conjugate_q3(self):
        basis = PolyBasis.plain(TABLE_SETS)
        assert evaluate_branch(1j, 3, True, basis) == pytest.approx(0 - 1j)

    def test_order_outside_set_rejected(self):
        basis = PolyBasis.plain(TABLE_SETS)
        with pytest.raises(ConfigurationError):
            evaluate_branch(1.0, 7, False, basis)
        with pytest.raises(ConfigurationError):
            evaluate_branch(1.0, 5, True, basis)  # conj set stops at 3

    def test_linear_in_u_table(self, rng):
        """Scaling one coefficient row scales that branch's output."""
        sets = BranchSets((1, 3), (1,))
        x = rng.normal(size=50) + 1j * rng.normal(size=50)
        base = PolyBasis("orthogonal", sets, {1: [2.0], 3: [0.3, 1.5]}, {1: [1.0]})
        doubled = PolyBasis("orthogonal", sets, {1: [2.0], 3: [0.6, 3.0]}, {1: [1.0]})
        assert_allclose(
            evaluate_branch(x, 3, False, doubled),
            2.0 * evaluate_branch(x, 3, False, base),
            rtol=1e-12,
        )

    def test_orthogonal_matches_gram_schmidt_oracle(self):
        training = _training_buffer(seed=8)
        basis = fit_orthogonal_basis(training, TABLE_SETS)
        oracle = gram_schmidt_basis_rows(training.samples.astype(np.complex128), (1, 3, 5))
        probe = np.array([0.05 + 0.02j, 0.1 - 0.3j, 0.25 + 0.2j, -0.15 + 0.05j])
        mag = np.abs(probe)
        for order in (1, 3, 5):
            members = [m for m in (1, 3, 5) if m <= order]
            want = np.zeros_like(probe)
            for u, m in zip(oracle[order], members):
                want += u * mag ** (m - 1) * probe
            got = evaluate_branch(probe, order, False, basis)
            assert_allclose(got, want, rtol=1e-5)


class TestFitOrthogonalBasis:
    def test_needs_10x_samples(self):
        with pytest.raises(InsufficientDataError):
            fit_orthogonal_basis(_training_buffer(n=49), TABLE_SETS)

    def test_constant_modulus_degenerates(self):
        phase = np.exp(2j * np.pi * np.linspace(0, 1, 500, endpoint=False))
        buf = IqBuffer(phase.astype(np.complex64), 1e6)
        with pytest.raises(ConditioningError) as exc_info:
            fit_orthogonal_basis(buf, TABLE_SETS)
        assert exc_info.value.condition_estimate is not None

    def test_gram_is_identity_on_training_set(self):
        training = _training_buffer(n=6000, seed=13)
        basis = fit_orthogonal_basis(training, TABLE_SETS)
        x = training.samples.astype(np.complex128)
        for conjugate, orders in ((False, (1, 3, 5)), (True, (1, 3))):
            signals = [evaluate_branch(x, p, conjugate, basis) for p in orders]
            k = len(signals)
            gram = np.empty((k, k), dtype=np.complex128)
            for i in range(k):
                for j in range(k):
                    gram[i, j] = np.mean(signals[i] * np.conj(signals[j]))
            norm = np.sqrt(np.abs(np.diag(gram)))
            gram /= np.outer(norm, norm)
            off = gram - np.diag(np.diag(gram))
            assert np.max(np.abs(off)) < 1e-3


class TestBuildBasisMatrix:
    def test_hand_convolution_block(self):
        """y=[1,2,3], one linear branch with two taps: the block is the
        plain zero-padded convolution matrix."""
        sets = BranchSets((1,), (1,))
        basis = PolyBasis.plain(sets)
        buf = IqBuffer(np.array([1, 2, 3], dtype=np.complex64), 1e6)
        psi = build_basis_matrix(buf, sets, (2,), (1,), basis)
        expected_block = np.array([[1, 0], [2, 1], [3, 2], [0, 3]], dtype=np.complex128)
        assert psi.n_rows == 4
        assert_allclose(psi.values[:, :2], expected_block)
        assert_allclose(psi.values[:, -1], np.ones(4))

    def test_table_config_shape(self):
        basis = PolyBasis.plain(TABLE_SETS)
        buf = _training_buffer(n=1000)
        psi = build_basis_matrix(buf, TABLE_SETS, (5, 5, 5), (5, 5), basis)
        assert (psi.n_rows, psi.n_cols) == (1004, 26)
        assert psi.column_layout == (
            ("main", 1, 5),
            ("main", 3, 5),
            ("main", 5, 5),
            ("conj", 1, 5),
            ("conj", 3, 5),
        )

    def test_toeplitz_within_blocks(self):
        basis = PolyBasis.plain(TABLE_SETS)
        psi = build_basis_matrix(_training_buffer(n=200), TABLE_SETS, (5, 5, 5), (5, 5), basis)
        col = 0
        for _, _, n_taps in psi.column_layout:
            block = psi.values[:, col : col + n_taps]
            for k in range(1, n_taps):
                assert_allclose(block[1:, k], block[:-1, k - 1], rtol=0, atol=0)
            col += n_taps

    def test_conjugate_block_is_main_block_of_conjugate_input(self):
        sets = BranchSets((1, 3), (1, 3))
        basis = PolyBasis.plain(sets)
        buf = _training_buffer(n=300, seed=21)
        conj_buf = IqBuffer(np.conj(buf.samples), buf.sample_rate_hz)
        psi = build_basis_matrix(buf, sets, (3, 3), (3, 3), basis)
        psi_conj_input = build_basis_matrix(conj_buf, sets, (3, 3), (3, 3), basis)
        # conj blocks occupy columns 6..11; main blocks 0..5
        assert_allclose(psi.values[:, 6:12], psi_conj_input.values[:, 0:6], rtol=0, atol=0)

    def test_short_buffer_rejected(self):
        basis = PolyBasis.plain(TABLE_SETS)
        buf = IqBuffer(np.ones(4, np.complex64), 1e6)
        with pytest.raises(InsufficientDataError):
            build_basis_matrix(buf, TABLE_SETS, (5, 5, 5), (5, 5), basis)
