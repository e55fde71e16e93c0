"""Train a predistorter against the simulated transmitter and show what it
buys: per-iteration linearization error, then adjacent-band regrowth before
and after correction.

    python3 demos/02_linearize_single_carrier.py
"""

from pathlib import Path

from aphdpd import (
    ila_train,
    load_experiment_config,
    predistort_serial,
    suppression_db,
    run_tx_chain,
    welch_psd,
)

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    cfg = load_experiment_config(ROOT / "configs" / "single_carrier.json", respect_env=False)
    aph = cfg.aph_config()
    chain = cfg.tx_chain()
    wave = cfg.waveform_factory()

    print(f"predistorter: {aph.n_coefficients} coefficients "
          f"({len(aph.sets.main_orders)} direct + {len(aph.sets.conj_orders)} conjugate branches, "
          f"{aph.l_max} taps each, {aph.basis.mode} basis)")

    coeffs, report = ila_train(chain, aph, cfg.training, make_waveform=wave)
    print(f"uncorrected chain error: {report.baseline_nmse_db:.2f} dB")
    for rec in report.records:
        flag = "accepted" if rec.accepted else "kept previous"
        print(f"  iteration {rec.iteration}: {rec.nmse_db:7.2f} dB  "
              f"gain {rec.gain.real:+.4f}{rec.gain.imag:+.4f}j  ({flag})")

    x = wave(cfg.n_samples, cfg.seed)
    before = welch_psd(run_tx_chain(x, chain), cfg.nfft, cfg.overlap)
    after = welch_psd(run_tx_chain(predistort_serial(x, coeffs, aph), chain), cfg.nfft, cfg.overlap)
    for lo, hi in cfg.bands:
        print(f"band [{lo / 1e6:+.1f}, {hi / 1e6:+.1f}] MHz: regrowth down "
              f"{suppression_db(before, after, lo, hi):.1f} dB")


if __name__ == "__main__":
    main()
