"""Shared test helpers: independent double-precision oracles.

The reference implementations here deliberately avoid the package's own
evaluation code paths (no shared kernels, no reused branch evaluators):
plain Python loops over the defining sums, in double precision, so that a
bug in the production engine cannot hide in its own oracle.
"""

from __future__ import annotations

import numpy as np
import pytest

from aphdpd import AphConfig, CoefficientVector, IqBuffer


def reference_predistort(x, coeffs: CoefficientVector, cfg: AphConfig) -> np.ndarray:
    """Brute-force branch-filter-bank evaluation, complex128 throughout."""
    xs = np.asarray(x, dtype=np.complex128)
    n = xs.size
    out = np.full(n, complex(coeffs.h[-1]), dtype=np.complex128)
    mag = np.abs(xs)
    offset = 0
    for orders, taps_list, table, base in (
        (cfg.sets.main_orders, cfg.taps_main, cfg.basis.u_main, xs),
        (cfg.sets.conj_orders, cfg.taps_conj, cfg.basis.u_conj, np.conj(xs)),
    ):
        for order, n_taps in zip(orders, taps_list):
            members = [m for m in orders if m <= order]
            psi = np.zeros(n, dtype=np.complex128)
            for u, m in zip(table[order], members):
                psi += u * mag ** (m - 1) * base
            for k in range(n_taps):
                out[k:] += complex(coeffs.h[offset + k]) * psi[: n - k]
            offset += n_taps
    return out


def gram_schmidt_basis_rows(samples: np.ndarray, orders) -> dict[int, np.ndarray]:
    """Classic Gram-Schmidt on the monomial envelope functions.

    Orthonormalizes {|x|^(m-1)} over the sample set under the weighted inner
    product <f, g> = mean(f * g * |x|^2), which is the correlation of the
    branch signals f(x)*x and g(x)*x. Returns coefficient rows over the
    member monomials, comparable to the fitted basis up to sign.
    """
    mag = np.abs(np.asarray(samples, dtype=np.complex128))
    w = mag**2
    rows = {}
    basis_vecs: list[np.ndarray] = []  # coefficient vectors over monomials
    for i, order in enumerate(orders):
        members = [m for m in orders if m <= order]
        coeff = np.zeros(i + 1)
        coeff[i] = 1.0

        def signal(c, members=members):
            acc = np.zeros_like(w)
            for ci, m in zip(c, members):
                acc = acc + ci * mag ** (m - 1)
            return acc

        v = coeff.copy()
        for prev in basis_vecs:
            proj = np.mean(signal(np.pad(prev, (0, i + 1 - prev.size))) * signal(v) * w)
            v = v - proj * np.pad(prev, (0, i + 1 - prev.size))
        norm = np.sqrt(np.mean(signal(v) ** 2 * w))
        v = v / norm
        basis_vecs.append(v)
        rows[order] = v
    return rows


@pytest.fixture
def rng():
    return np.random.default_rng(0xD1D)


@pytest.fixture
def noise_buffer(rng):
    """200k-sample complex Gaussian buffer at a moderate drive."""
    x = rng.normal(size=200_000) + 1j * rng.normal(size=200_000)
    x *= 0.2 / np.sqrt(np.mean(np.abs(x) ** 2))
    return IqBuffer(x.astype(np.complex64), 61.44e6)
