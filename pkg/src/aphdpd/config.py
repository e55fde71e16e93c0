"""Experiment configuration: one JSON document drives the whole pipeline.

Loading is strict in both directions — a missing required key and an
unrecognized key are both errors that name the offending key — because a
silently ignored typo ("tapsmain") would change experiment results without
any visible failure.

The document aggregates everything a run needs: sampling, carriers, the
predistorter structure, training knobs, the simulated chain impairments,
and the analysis bands. Complex values are written as [re, im] pairs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .basis import ORTHOGONAL, PLAIN, BranchSets, PolyBasis, fit_orthogonal_basis
from .exceptions import ConfigurationError
from .impairments import IqModulatorModel, PaModel, TxChain
from .predistorter import AphConfig
from .training import TrainingConfig
from .waveforms import CarrierSpec, IqBuffer, compose_multicarrier, normalize_power

SEED_ENV_VAR = "DPD_SEED"

# Seed offset for the dedicated basis-fitting buffer, so it never collides
# with the validation stimulus (seed) or training draws (seed+1..seed+iters).
_BASIS_FIT_SEED_OFFSET = 500


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ConfigurationError(f"config missing required key '{where}{key}'")
    return doc[key]


def _reject_unknown(doc: dict, allowed, where: str) -> None:
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ConfigurationError(f"unknown config key '{where}{unknown[0]}'")


def _complex_pair(value, where: str) -> complex:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise ConfigurationError(f"'{where}' must be a [re, im] pair, got {value!r}")
    return complex(value[0], value[1])


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, fully typed view of one experiment document."""

    sample_rate_hz: float
    n_samples: int
    seed: int
    drive_rms: float
    carriers: tuple[CarrierSpec, ...]
    branch_sets: BranchSets
    taps_main: tuple[int, ...]
    taps_conj: tuple[int, ...]
    basis_mode: str
    training: TrainingConfig
    pa: PaModel
    modulator: IqModulatorModel
    nfft: int
    overlap: float
    bands: tuple[tuple[float, float], ...]

    def tx_chain(self) -> TxChain:
        return TxChain(self.modulator, self.pa)

    def waveform_factory(self):
        """(n, seed) -> composed multicarrier stimulus at the drive level."""
        carriers = self.carriers
        fs = self.sample_rate_hz
        drive = self.drive_rms

        def make(n: int, seed: int) -> IqBuffer:
            return normalize_power(compose_multicarrier(list(carriers), n, fs, seed), drive)

        return make

    def aph_config(self) -> AphConfig:
        """Build the predistorter structure, fitting the basis if needed.

        The orthogonal basis is fitted on a dedicated stimulus (twice the
        training length, offset seed), deterministic per config seed.
        """
        if self.basis_mode == PLAIN:
            basis = PolyBasis.plain(self.branch_sets)
        else:
            wave = self.waveform_factory()
            fit_buf = wave(
                2 * self.training.n_training_samples, self.seed + _BASIS_FIT_SEED_OFFSET
            )
            basis = fit_orthogonal_basis(fit_buf, self.branch_sets)
        return AphConfig(self.branch_sets, self.taps_main, self.taps_conj, basis)


def _parse_taps(value, n_branches: int, where: str) -> tuple[int, ...]:
    if isinstance(value, int):
        return (value,) * n_branches
    if isinstance(value, list) and all(isinstance(v, int) for v in value):
        if len(value) != n_branches:
            raise ConfigurationError(
                f"'{where}' lists {len(value)} tap counts for {n_branches} branches"
            )
        return tuple(value)
    raise ConfigurationError(f"'{where}' must be an int or list of ints, got {value!r}")


def parse_experiment_config(doc: dict, seed_override: int | None = None) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigurationError("config document must be a JSON object")
    top_allowed = (
        "sample_rate_hz",
        "n_samples",
        "seed",
        "drive_rms",
        "carriers",
        "dpd",
        "training",
        "pa",
        "iq_modulator",
        "analysis",
    )
    _reject_unknown(doc, top_allowed, "")

    fs = float(_require(doc, "sample_rate_hz", ""))
    n_samples = int(_require(doc, "n_samples", ""))
    seed = int(_require(doc, "seed", ""))
    drive_rms = float(_require(doc, "drive_rms", ""))
    if n_samples < 1:
        raise ConfigurationError(f"'n_samples' must be >= 1, got {n_samples}")
    if drive_rms <= 0:
        raise ConfigurationError(f"'drive_rms' must be positive, got {drive_rms}")
    if seed_override is not None:
        seed = int(seed_override)

    raw_carriers = _require(doc, "carriers", "")
    if not isinstance(raw_carriers, list) or not raw_carriers:
        raise ConfigurationError("'carriers' must be a nonempty list")
    carriers = []
    for i, entry in enumerate(raw_carriers):
        where = f"carriers[{i}]."
        _reject_unknown(entry, ("center_offset_hz", "bandwidth_hz", "power_db"), where)
        spec = CarrierSpec(
            float(_require(entry, "center_offset_hz", where)),
            float(_require(entry, "bandwidth_hz", where)),
            float(entry.get("power_db", 0.0)),
        )
        spec.check_fits(fs)
        carriers.append(spec)

    dpd = _require(doc, "dpd", "")
    _reject_unknown(
        dpd, ("max_order_main", "max_order_conj", "taps_main", "taps_conj", "basis_mode"), "dpd."
    )
    sets = BranchSets.odd_orders_up_to(
        int(_require(dpd, "max_order_main", "dpd.")),
        int(_require(dpd, "max_order_conj", "dpd.")),
    )
    taps_main = _parse_taps(
        _require(dpd, "taps_main", "dpd."), len(sets.main_orders), "dpd.taps_main"
    )
    taps_conj = _parse_taps(
        _require(dpd, "taps_conj", "dpd."), len(sets.conj_orders), "dpd.taps_conj"
    )
    basis_mode = _require(dpd, "basis_mode", "dpd.")
    if basis_mode not in (PLAIN, ORTHOGONAL):
        raise ConfigurationError(f"'dpd.basis_mode' must be plain or orthogonal, got {basis_mode!r}")

    tr = _require(doc, "training", "")
    _reject_unknown(
        tr,
        ("n_training_samples", "iterations", "ridge_lambda", "regress_on_input", "feedback_noise_db"),
        "training.",
    )
    ridge = tr.get("ridge_lambda")
    training = TrainingConfig(
        n_training_samples=int(_require(tr, "n_training_samples", "training.")),
        iterations=int(tr.get("iterations", 3)),
        ridge_lambda=None if ridge is None else float(ridge),
        seed=seed,
        regress_on_input=bool(tr.get("regress_on_input", False)),
        feedback_noise_db=(
            None if tr.get("feedback_noise_db") is None else float(tr["feedback_noise_db"])
        ),
    )

    pa_doc = _require(doc, "pa", "")
    _reject_unknown(pa_doc, ("alpha1", "alpha3", "alpha5"), "pa.")
    pa = PaModel(
        _complex_pair(_require(pa_doc, "alpha1", "pa."), "pa.alpha1"),
        _complex_pair(pa_doc.get("alpha3", [0.0, 0.0]), "pa.alpha3"),
        _complex_pair(pa_doc.get("alpha5", [0.0, 0.0]), "pa.alpha5"),
    )

    mod_doc = _require(doc, "iq_modulator", "")
    _reject_unknown(
        mod_doc, ("gain_imbalance_db", "phase_imbalance_deg", "lo_leakage"), "iq_modulator."
    )
    modulator = IqModulatorModel(
        float(mod_doc.get("gain_imbalance_db", 0.0)),
        float(mod_doc.get("phase_imbalance_deg", 0.0)),
        _complex_pair(mod_doc.get("lo_leakage", [0.0, 0.0]), "iq_modulator.lo_leakage"),
    )

    an = _require(doc, "analysis", "")
    _reject_unknown(an, ("nfft", "overlap", "bands"), "analysis.")
    nfft = int(an.get("nfft", 4096))
    overlap = float(an.get("overlap", 0.5))
    raw_bands = _require(an, "bands", "analysis.")
    if not isinstance(raw_bands, list):
        raise ConfigurationError("'analysis.bands' must be a list of [f_lo, f_hi] pairs")
    bands = []
    for i, band in enumerate(raw_bands):
        if not isinstance(band, list) or len(band) != 2:
            raise ConfigurationError(f"'analysis.bands[{i}]' must be a [f_lo, f_hi] pair")
        lo, hi = float(band[0]), float(band[1])
        if not lo < hi:
            raise ConfigurationError(f"'analysis.bands[{i}]' must have f_lo < f_hi")
        if lo < -fs / 2 or hi > fs / 2:
            raise ConfigurationError(
                f"'analysis.bands[{i}]' [{lo}, {hi}] extends beyond Nyquist (+-{fs / 2})"
            )
        bands.append((lo, hi))

    return ExperimentConfig(
        sample_rate_hz=fs,
        n_samples=n_samples,
        seed=seed,
        drive_rms=drive_rms,
        carriers=tuple(carriers),
        branch_sets=sets,
        taps_main=taps_main,
        taps_conj=taps_conj,
        basis_mode=basis_mode,
        training=training,
        pa=pa,
        modulator=modulator,
        nfft=nfft,
        overlap=overlap,
        bands=tuple(bands),
    )


def load_experiment_config(path, respect_env: bool = True) -> ExperimentConfig:
    """Load and validate a config file; DPD_SEED (if set) overrides its seed."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigurationError(f"{path}: invalid JSON ({err})") from err
    seed_override = None
    if respect_env and os.environ.get(SEED_ENV_VAR):
        try:
            seed_override = int(os.environ[SEED_ENV_VAR])
        except ValueError as err:
            raise ConfigurationError(
                f"{SEED_ENV_VAR} must be an integer, got {os.environ[SEED_ENV_VAR]!r}"
            ) from err
    return parse_experiment_config(doc, seed_override)
