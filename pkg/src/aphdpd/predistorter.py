"""The predistorter core: branch-filter-bank evaluation of

    z[n] = sum_p sum_k h[p,k] * psi_p(x[n-k])
         + sum_q sum_k hq[q,k] * psibar_q(x[n-k])
         + c

with a serial reference path and a chunked, halo-overlapped data-parallel
path that is bit-identical to it.

Bit identity is a structural property here, not a tolerance: every sample's
value is produced by the same sequence of elementwise IEEE operations no
matter how the stream is split. Two rules make that true:

* Each branch FIR is evaluated as a tap-ascending shifted accumulation
  (acc[k:] += h_k * psi[:-k]), so sample n is always built as
  (((h0*psi_n) + h1*psi_{n-1}) + ...) regardless of window length. Library
  convolutions were rejected: scipy.signal.lfilter's single-coefficient
  denominator path falls through to np.convolve, which swaps its arguments
  when a window is not longer than the taps and changes the summation order.
* Accumulation across branches is fixed: main branches ascending, conjugate
  branches ascending, then the constant c.

Each chunk is computed from its own samples plus the `halo` preceding ones
(halo = max tap count - 1); the halo outputs are recomputed redundantly and
discarded, so workers never communicate mid-stream and output writes are
disjoint.

Arithmetic is single precision throughout (complex64 samples, float32
envelopes). Every scalar touching the hot loop is pre-cast: numpy 2 promotes
complex64 * float64-scalar to complex128, which would silently break both
the precision contract and bit identity.

Per sample, branch envelopes are evaluated once from low to high order with
incremental magnitude powers (r2, then r2*r2, ...), so lower-order partial
results are reused by higher-order branches.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .basis import ORTHOGONAL, BranchSets, PolyBasis, _members
from .exceptions import ConfigurationError
from .waveforms import IqBuffer

# Serial-path internal block size. Whole-buffer evaluation thrashes the cache
# (~5x slower at 1M samples); any block size gives identical bits.
SERIAL_BLOCK_LEN = 65536
DEFAULT_CHUNK_LEN = 65536


@dataclass(frozen=True)
class AphConfig:
    """Branch structure of the predistorter: orders, tap counts, basis."""

    sets: BranchSets
    taps_main: tuple[int, ...]
    taps_conj: tuple[int, ...]
    basis: PolyBasis

    def __post_init__(self):
        object.__setattr__(self, "taps_main", tuple(int(t) for t in self.taps_main))
        object.__setattr__(self, "taps_conj", tuple(int(t) for t in self.taps_conj))
        if len(self.taps_main) != len(self.sets.main_orders):
            raise ConfigurationError("taps_main must align with sets.main_orders")
        if len(self.taps_conj) != len(self.sets.conj_orders):
            raise ConfigurationError("taps_conj must align with sets.conj_orders")
        if any(t < 1 for t in (*self.taps_main, *self.taps_conj)):
            raise ConfigurationError("every branch needs at least one tap")
        if self.basis.sets != self.sets:
            raise ConfigurationError("basis was built for different branch sets")

    @classmethod
    def default(cls, basis: PolyBasis | None = None) -> "AphConfig":
        """The reference configuration: odd orders to 5 (main) and 3
        (conjugate), five taps per branch, 26 coefficients total."""
        sets = BranchSets.odd_orders_up_to(5, 3)
        if basis is None:
            basis = PolyBasis.plain(sets)
        return cls(sets, (5,) * len(sets.main_orders), (5,) * len(sets.conj_orders), basis)

    @property
    def l_max(self) -> int:
        return max((*self.taps_main, *self.taps_conj))

    @property
    def n_coefficients(self) -> int:
        return sum(self.taps_main) + sum(self.taps_conj) + 1

    def branch_slices(self) -> list[tuple[str, int, slice]]:
        """(family, order, slice into the stacked vector) per branch, in order."""
        out = []
        offset = 0
        for family, orders, taps in (
            ("main", self.sets.main_orders, self.taps_main),
            ("conj", self.sets.conj_orders, self.taps_conj),
        ):
            for order, n_taps in zip(orders, taps):
                out.append((family, order, slice(offset, offset + n_taps)))
                offset += n_taps
        return out


@dataclass(frozen=True)
class CoefficientVector:
    """Stacked filter taps plus the constant: [h_main..., h_conj..., c].

    Stored single precision (complex64), the processing precision; the
    training solver works in double and casts on output.
    """

    h: np.ndarray

    def __post_init__(self):
        h = np.ascontiguousarray(np.asarray(self.h, dtype=np.complex64))
        if h.ndim != 1 or h.size < 1:
            raise ConfigurationError("coefficient vector must be a nonempty 1-D array")
        if not np.all(np.isfinite(h)):
            raise ConfigurationError("coefficient vector must be finite")
        object.__setattr__(self, "h", h)

    @property
    def c(self) -> complex:
        return complex(self.h[-1])

    def __len__(self) -> int:
        return self.h.size


def identity_coefficients(cfg: AphConfig) -> CoefficientVector:
    """Coefficients that make the predistorter the identity map.

    Exact (bit-for-bit passthrough) for a plain basis; for an orthogonal
    basis the first branch is x scaled by u[1,1], so the inverse scale is
    identity only to single-precision rounding.
    """
    if cfg.sets.main_orders[0] != 1:
        raise ConfigurationError("identity needs a linear main branch (order 1)")
    h = np.zeros(cfg.n_coefficients, dtype=np.complex128)
    h[0] = 1.0 / cfg.basis.u_main[1][0]
    return CoefficientVector(h.astype(np.complex64))


def pack_coefficients(
    per_branch: dict[tuple[str, int], np.ndarray], c: complex, cfg: AphConfig
) -> CoefficientVector:
    """Stack per-branch tap vectors (keyed ("main"|"conj", order)) plus c."""
    expected = {(family, order) for family, order, _ in cfg.branch_slices()}
    if set(per_branch) != expected:
        raise ConfigurationError(
            f"branch keys {sorted(per_branch)} do not match config branches {sorted(expected)}"
        )
    h = np.zeros(cfg.n_coefficients, dtype=np.complex64)
    for family, order, sl in cfg.branch_slices():
        taps = np.asarray(per_branch[(family, order)], dtype=np.complex64)
        if taps.shape != (sl.stop - sl.start,):
            raise ConfigurationError(
                f"branch ({family}, {order}) expects {sl.stop - sl.start} taps, "
                f"got shape {taps.shape}"
            )
        h[sl] = taps
    h[-1] = c
    return CoefficientVector(h)


def unpack_coefficients(
    coeffs: CoefficientVector, cfg: AphConfig
) -> tuple[dict[tuple[str, int], np.ndarray], complex]:
    """Inverse of pack_coefficients."""
    _check_length(coeffs, cfg)
    per_branch = {
        (family, order): coeffs.h[sl].copy() for family, order, sl in cfg.branch_slices()
    }
    return per_branch, coeffs.c


@dataclass(frozen=True)
class ChunkPlan:
    """How the parallel path splits a stream: chunk length, halo, workers."""

    chunk_len: int
    halo: int
    n_workers: int

    def __post_init__(self):
        if self.chunk_len < 1:
            raise ConfigurationError(f"chunk_len must be >= 1, got {self.chunk_len}")
        if self.halo < 0:
            raise ConfigurationError(f"halo must be >= 0, got {self.halo}")
        if self.chunk_len <= self.halo:
            raise ConfigurationError(
                f"chunk_len ({self.chunk_len}) must exceed halo ({self.halo})"
            )
        if self.n_workers < 1:
            raise ConfigurationError(f"n_workers must be >= 1, got {self.n_workers}")

    @classmethod
    def for_config(
        cls, cfg: AphConfig, chunk_len: int = DEFAULT_CHUNK_LEN, n_workers: int = 1
    ) -> "ChunkPlan":
        return cls(chunk_len, cfg.l_max - 1, n_workers)


def _check_length(coeffs: CoefficientVector, cfg: AphConfig) -> None:
    if len(coeffs) != cfg.n_coefficients:
        raise ConfigurationError(
            f"coefficient vector has {len(coeffs)} entries, config needs {cfg.n_coefficients}"
        )


class _CompiledKernel:
    """Coefficients + basis folded into a flat per-chunk evaluation program."""

    def __init__(self, coeffs: CoefficientVector, cfg: AphConfig):
        _check_length(coeffs, cfg)
        self.l_max = cfg.l_max
        self.c = np.complex64(coeffs.h[-1])

        # One entry per branch, in accumulation order:
        #   (conjugate?, taps[c64], envelope terms [(power_index, f32 coeff)] or None)
        # A None envelope means psi(x) = x (or conj x) with the single basis
        # coefficient pre-folded into the taps in double precision.
        self.branches = []
        self.max_power = 0
        tables = {"main": cfg.basis.u_main, "conj": cfg.basis.u_conj}
        orders = {"main": cfg.sets.main_orders, "conj": cfg.sets.conj_orders}
        for family, order, sl in cfg.branch_slices():
            u = tables[family][order]
            members = _members(order, orders[family])
            taps = coeffs.h[sl]
            if tuple(members) == (1,):
                # Pure linear branch: psi(x) = u*x, so fold u into the taps
                # (in double, before the single-precision cast).
                folded = (taps.astype(np.complex128) * float(u[0])).astype(np.complex64)
                self.branches.append((family == "conj", folded, None))
            else:
                terms = [((m - 1) // 2, np.float32(coeff)) for coeff, m in zip(u, members)]
                self.max_power = max(self.max_power, terms[-1][0])
                self.branches.append((family == "conj", taps.copy(), terms))

    def __call__(self, window: np.ndarray) -> np.ndarray:
        """Evaluate one window (complex64 in, complex64 out, same length)."""
        n = window.size
        powers = [None]  # powers[j] = |x|^(2j), built low to high
        if self.max_power:
            r2 = window.real * window.real
            r2 += window.imag * window.imag
            powers.append(r2)
            for _ in range(2, self.max_power + 1):
                powers.append(powers[-1] * r2)

        conj_window = None
        acc = None
        for is_conj, taps, terms in self.branches:
            if is_conj and conj_window is None:
                conj_window = np.conj(window)
            base = conj_window if is_conj else window
            if terms is None:
                psi = base
            else:
                first_power, first_coeff = terms[0]
                if first_power == 0:
                    envelope = np.full(n, first_coeff, dtype=np.float32)
                else:
                    envelope = first_coeff * powers[first_power]
                for power_index, coeff in terms[1:]:
                    envelope += coeff * powers[power_index]
                psi = envelope * base
            # Tap-ascending shifted accumulation: fixed per-sample op order.
            branch_acc = taps[0] * psi
            for k in range(1, taps.size):
                branch_acc[k:] += taps[k] * psi[: n - k]
            acc = branch_acc if acc is None else acc + branch_acc
        acc += self.c
        return acc


def _run_chunked(
    x: np.ndarray, kernel: _CompiledKernel, chunk_len: int, executor: ThreadPoolExecutor | None
) -> np.ndarray:
    n = x.size
    out = np.empty(n, dtype=np.complex64)
    halo = kernel.l_max - 1
    starts = range(0, n, chunk_len)

    def one_chunk(start: int) -> None:
        end = min(start + chunk_len, n)
        window_start = max(0, start - halo)
        result = kernel(x[window_start:end])
        out[start:end] = result[start - window_start :]

    if executor is None:
        for start in starts:
            one_chunk(start)
    else:
        # Materialize to propagate worker exceptions; writes are disjoint.
        list(executor.map(one_chunk, starts))
    return out


def predistort_sample(
    history_window, coeffs: CoefficientVector, cfg: AphConfig
) -> complex:
    """Evaluate one output sample from its input history.

    The window holds the last l_max inputs ending at the current sample,
    zero-filled before stream start. Runs the same compiled kernel as the
    streaming paths, so it agrees with them bit-for-bit.
    """
    window = np.asarray(history_window, dtype=np.complex64)
    if window.shape != (cfg.l_max,):
        raise ConfigurationError(
            f"history window must hold exactly {cfg.l_max} samples, got {window.shape}"
        )
    kernel = _CompiledKernel(coeffs, cfg)
    return complex(kernel(window)[-1])


def predistort_serial(x: IqBuffer, coeffs: CoefficientVector, cfg: AphConfig) -> IqBuffer:
    """Reference path: sequential evaluation of the whole stream."""
    kernel = _CompiledKernel(coeffs, cfg)
    if len(x) == 0:
        return IqBuffer(np.empty(0, dtype=np.complex64), x.sample_rate_hz)
    out = _run_chunked(x.samples, kernel, SERIAL_BLOCK_LEN, executor=None)
    return IqBuffer(out, x.sample_rate_hz)


def predistort_parallel(
    x: IqBuffer, coeffs: CoefficientVector, cfg: AphConfig, plan: ChunkPlan
) -> IqBuffer:
    """Data-parallel path: chunks with recomputed halos, bit-identical to serial."""
    if plan.halo != cfg.l_max - 1:
        raise ConfigurationError(
            f"plan halo {plan.halo} does not match config (needs {cfg.l_max - 1})"
        )
    kernel = _CompiledKernel(coeffs, cfg)
    if len(x) == 0:
        return IqBuffer(np.empty(0, dtype=np.complex64), x.sample_rate_hz)
    with ThreadPoolExecutor(max_workers=plan.n_workers) as executor:
        out = _run_chunked(x.samples, kernel, plan.chunk_len, executor)
    return IqBuffer(out, x.sample_rate_hz)


# --- coefficient file format -------------------------------------------------

def coefficients_to_json_dict(coeffs: CoefficientVector, cfg: AphConfig) -> dict:
    """Self-contained JSON form: taps, constant, and the layout + basis
    needed to apply them anywhere."""
    _check_length(coeffs, cfg)
    filters = coeffs.h[:-1]
    return {
        "h": [[float(v.real), float(v.imag)] for v in filters],
        "c": [float(coeffs.h[-1].real), float(coeffs.h[-1].imag)],
        "layout": {
            "main_orders": list(cfg.sets.main_orders),
            "conj_orders": list(cfg.sets.conj_orders),
            "taps_main": list(cfg.taps_main),
            "taps_conj": list(cfg.taps_conj),
            "basis": cfg.basis.to_json_dict(),
        },
    }


def coefficients_from_json_dict(doc: dict) -> tuple[CoefficientVector, AphConfig]:
    """Rebuild coefficients plus the AphConfig they were trained under."""
    layout = doc["layout"]
    basis = PolyBasis.from_json_dict(layout["basis"])
    cfg = AphConfig(
        BranchSets(tuple(layout["main_orders"]), tuple(layout["conj_orders"])),
        tuple(layout["taps_main"]),
        tuple(layout["taps_conj"]),
        basis,
    )
    filters = [complex(re, im) for re, im in doc["h"]]
    c = complex(doc["c"][0], doc["c"][1])
    h = np.array(filters + [c], dtype=np.complex64)
    coeffs = CoefficientVector(h)
    _check_length(coeffs, cfg)
    return coeffs, cfg
