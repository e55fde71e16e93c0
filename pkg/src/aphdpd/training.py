"""Indirect-learning training of the predistorter coefficients.

Each iteration drives the simulated transmit chain with a fresh
seed-derived waveform, scales the feedback by the estimated complex chain
gain, regresses the predistorter input on the scaled feedback, and solves
a ridge-stabilized least-squares problem in double precision.

Plain iterate-and-replace learning is not a descent method: once near its
fixed point, consecutive fits wander by several dB because the update has
no memory of how good the previous solution was (near-degenerate regressor
directions plus bias from PA behavior outside the model class). To make
the reported quality monotone, each new fit is a *candidate*: it replaces
the current coefficients only if it does not worsen the linearization NMSE
on a fixed validation stimulus generated once per session. Rejected
candidates leave the state unchanged, so the per-iteration NMSE series is
non-increasing by construction and the final coefficients are the best
validated ones.

Everything is deterministic given the seed: waveform draws, feedback noise
(when enabled), and the solver, so two runs produce bit-identical reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisMatrix, build_basis_matrix
from .exceptions import (
    ConditioningError,
    ConfigurationError,
    DegenerateInputError,
    DivergenceError,
    InsufficientDataError,
)
from .impairments import TxChain, run_tx_chain
from .predistorter import AphConfig, CoefficientVector, identity_coefficients, predistort_serial
from .waveforms import IqBuffer

NMSE_FLOOR_DB = -300.0

# Default stimulus drive when the caller supplies no waveform factory.
# Well below the fold-over amplitude of typical compressive PA models, so
# out-of-model excursions stay rare at multitone peak factors.
DEFAULT_TRAINING_RMS = 0.15


@dataclass(frozen=True)
class TrainingConfig:
    """Knobs of one training session.

    ridge_lambda=None selects an automatic level proportional to the mean
    Gram diagonal (1e-8 x trace/cols): strong enough to absorb degenerate
    regressor directions, far too weak to bias a well-posed fit.

    regress_on_input switches the regression matrix from scaled feedback
    to the raw stimulus (a deliberately available alternative reading of
    the learning rule, kept for comparison runs).

    feedback_noise_db, when set, adds complex white noise to the feedback
    capture at the given power relative to the feedback signal.
    """

    n_training_samples: int
    iterations: int = 3
    ridge_lambda: float | None = None
    seed: int = 0
    regress_on_input: bool = False
    feedback_noise_db: float | None = None

    def __post_init__(self):
        if self.n_training_samples < 1:
            raise ConfigurationError(
                f"n_training_samples must be >= 1, got {self.n_training_samples}"
            )
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {self.iterations}")
        if self.ridge_lambda is not None and self.ridge_lambda < 0:
            raise ConfigurationError(f"ridge_lambda must be >= 0, got {self.ridge_lambda}")


@dataclass(frozen=True)
class IterationRecord:
    """State after one training iteration (the kept state, not necessarily
    the fresh candidate: `accepted` says whether the candidate replaced it)."""

    iteration: int
    coefficients: CoefficientVector
    nmse_db: float
    residual_norm: float
    condition_estimate: float
    gain: complex
    accepted: bool

    def to_json_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "nmse_db": self.nmse_db,
            "residual_norm": self.residual_norm,
            "condition_estimate": self.condition_estimate,
            "gain": [self.gain.real, self.gain.imag],
            "accepted": self.accepted,
            "coefficients": [[float(v.real), float(v.imag)] for v in self.coefficients.h],
        }


@dataclass(frozen=True)
class TrainingReport:
    """Per-iteration records plus the no-predistortion baseline."""

    records: tuple[IterationRecord, ...]
    baseline_nmse_db: float

    def to_json_list(self) -> list[dict]:
        return [r.to_json_dict() for r in self.records]

    @property
    def nmse_db(self) -> list[float]:
        return [r.nmse_db for r in self.records]


def estimate_gain(pa_in: IqBuffer, pa_out: IqBuffer) -> complex:
    """Least-squares complex gain: argmin_g sum |pa_out - g*pa_in|^2."""
    if len(pa_in) != len(pa_out) or len(pa_in) == 0:
        raise ConfigurationError(
            f"buffers must be nonempty and equal length, got {len(pa_in)} vs {len(pa_out)}"
        )
    a = pa_in.samples.astype(np.complex128)
    b = pa_out.samples.astype(np.complex128)
    denom = float(np.sum(a.real**2 + a.imag**2))
    if denom == 0.0:
        raise DegenerateInputError("cannot estimate gain from an all-zero input")
    return complex(np.vdot(a, b) / denom)


def _lstsq_ridge(
    values: np.ndarray, target: np.ndarray, ridge_lambda: float
) -> tuple[np.ndarray, float, float]:
    """Solve min ||A h - b||^2 + lambda ||h||^2 in double precision.

    Returns (h, data residual norm ||A h - b||, condition estimate of the
    normal matrix A^H A + lambda I). Raises ConditioningError when the
    unregularized problem is rank-deficient.
    """
    rows, cols = values.shape
    if ridge_lambda > 0.0:
        a = np.vstack([values, np.sqrt(ridge_lambda) * np.eye(cols, dtype=values.dtype)])
        b = np.concatenate([target, np.zeros(cols, dtype=target.dtype)])
    else:
        a, b = values, target
    h, _, rank, sv = np.linalg.lstsq(a, b, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if ridge_lambda == 0.0 and rank < cols:
        raise ConditioningError(
            f"regression matrix is numerically singular (rank {rank} of {cols})",
            condition_estimate=cond,
        )
    residual = float(np.linalg.norm(values @ h - target))
    return h, residual, cond**2


def ls_solve(psi, target, ridge_lambda: float = 0.0) -> CoefficientVector:
    """Ridge least squares over a basis matrix, cast to processing precision.

    `target` must already be padded to the matrix row count (the matrix has
    tail rows for the trailing filter memory).
    """
    values = psi.values if isinstance(psi, BasisMatrix) else np.asarray(psi)
    values = values.astype(np.complex128)
    if values.ndim != 2 or values.shape[0] < values.shape[1]:
        raise ConfigurationError(f"need rows >= cols, got shape {values.shape}")
    if ridge_lambda < 0:
        raise ConfigurationError(f"ridge_lambda must be >= 0, got {ridge_lambda}")
    b = np.asarray(target, dtype=np.complex128)
    if b.shape != (values.shape[0],):
        raise ConfigurationError(
            f"target length {b.shape} does not match {values.shape[0]} matrix rows"
        )
    h, _, _ = _lstsq_ridge(values, b, float(ridge_lambda))
    return CoefficientVector(h.astype(np.complex64))


def _default_waveform_factory(n: int, seed: int) -> IqBuffer:
    """Complex white Gaussian stimulus at the default drive (rate-agnostic)."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    x *= DEFAULT_TRAINING_RMS / np.sqrt(np.mean(x.real**2 + x.imag**2))
    return IqBuffer(x.astype(np.complex64), 1.0)


def _apply_stage(fn, *args, candidate: bool):
    """Run one pipeline stage; non-finite output means a diverged system.

    For the committed state that is a hard error (the drive is too hot for
    the chain); for a candidate evaluation it just disqualifies the
    candidate (returns None).
    """
    try:
        return fn(*args)
    except ConfigurationError as err:
        if candidate:
            return None
        raise DivergenceError(
            "transmit chain produced non-finite samples; reduce the drive level"
        ) from err


def _linearization_nmse_db(
    chain: TxChain, cfg: AphConfig, coeffs: CoefficientVector, stimulus: IqBuffer, *,
    candidate: bool,
) -> float:
    """NMSE (dB) between the chain output and the ideally scaled stimulus.

    Returns +inf for a candidate whose evaluation blows up.
    """
    z = _apply_stage(predistort_serial, stimulus, coeffs, cfg, candidate=candidate)
    if z is None:
        return float("inf")
    s = _apply_stage(run_tx_chain, z, chain, candidate=candidate)
    if s is None:
        return float("inf")
    y = stimulus.samples.astype(np.complex128)
    sv = s.samples.astype(np.complex128)
    denom = float(np.sum(y.real**2 + y.imag**2))
    if denom == 0.0:
        raise DegenerateInputError("validation stimulus is all-zero")
    gain = np.vdot(y, sv) / denom
    if gain == 0:
        return float("inf")
    err = sv / gain - y
    ratio = float(np.sum(err.real**2 + err.imag**2)) / denom
    if not np.isfinite(ratio):
        return float("inf")
    return max(10.0 * float(np.log10(max(ratio, 1e-300))), NMSE_FLOOR_DB)


def _add_feedback_noise(s: IqBuffer, noise_db: float, rng: np.random.Generator) -> IqBuffer:
    level = s.rms() * 10.0 ** (noise_db / 20.0)
    noise = (rng.normal(size=len(s)) + 1j * rng.normal(size=len(s))) / np.sqrt(2.0)
    return IqBuffer(
        (s.samples.astype(np.complex128) + level * noise).astype(np.complex64),
        s.sample_rate_hz,
    )


def ila_train(
    chain: TxChain,
    cfg: AphConfig,
    tcfg: TrainingConfig,
    make_waveform=None,
) -> tuple[CoefficientVector, TrainingReport]:
    """Train predistorter coefficients against a simulated transmit chain.

    make_waveform(n, seed) -> IqBuffer supplies the stimuli; the default is
    a white Gaussian source at a conservative drive. Iteration i trains on
    seed+i; the validation stimulus uses the base seed and never changes.
    """
    n_coeff = cfg.n_coefficients
    m = tcfg.n_training_samples
    if m < 10 * n_coeff:
        raise InsufficientDataError(
            f"n_training_samples={m} is below 10x the coefficient count ({10 * n_coeff})"
        )
    wave = make_waveform if make_waveform is not None else _default_waveform_factory

    validation = wave(m, tcfg.seed)
    coeffs = identity_coefficients(cfg)
    current_nmse = _linearization_nmse_db(chain, cfg, coeffs, validation, candidate=False)
    baseline_nmse = current_nmse

    records: list[IterationRecord] = []
    for i in range(1, tcfg.iterations + 1):
        y = wave(m, tcfg.seed + i)
        z = _apply_stage(predistort_serial, y, coeffs, cfg, candidate=False)
        s = _apply_stage(run_tx_chain, z, chain, candidate=False)
        if tcfg.feedback_noise_db is not None:
            rng = np.random.default_rng(tcfg.seed + 7919 * i)
            s = _add_feedback_noise(s, tcfg.feedback_noise_db, rng)
        gain = estimate_gain(z, s)

        if tcfg.regress_on_input:
            regressor = y
        else:
            regressor = IqBuffer(
                (s.samples.astype(np.complex128) / gain).astype(np.complex64),
                s.sample_rate_hz,
            )
        psi = build_basis_matrix(regressor, cfg.sets, cfg.taps_main, cfg.taps_conj, cfg.basis)
        target = np.zeros(psi.n_rows, dtype=np.complex128)
        target[: len(z)] = z.samples.astype(np.complex128)

        values = psi.values
        if tcfg.ridge_lambda is None:
            gram_trace = float(np.sum(values.real**2 + values.imag**2))
            lam = 1e-8 * gram_trace / psi.n_cols
        else:
            lam = float(tcfg.ridge_lambda)
        h, residual, cond = _lstsq_ridge(values, target, lam)
        candidate = CoefficientVector(h.astype(np.complex64))

        candidate_nmse = _linearization_nmse_db(
            chain, cfg, candidate, validation, candidate=True
        )
        accepted = candidate_nmse <= current_nmse
        if accepted:
            coeffs = candidate
            current_nmse = candidate_nmse
        records.append(
            IterationRecord(
                iteration=i,
                coefficients=coeffs,
                nmse_db=current_nmse,
                residual_norm=residual,
                condition_estimate=cond,
                gain=gain,
                accepted=accepted,
            )
        )

    return coeffs, TrainingReport(tuple(records), baseline_nmse)
