"""Simulation laboratory for the continuous-time AWGN channel with white
(memoryless) phase noise.

Core layers, in dependency order:

* :mod:`phaselab.grid` builds conforming time grids, pulses and the
  trigonometric basis, and evaluates Riemann-sum inner products;
* :mod:`phaselab.stochastics` supplies phase-noise models, calibrated
  complex AWGN, and reproducible multi-stream randomness;
* :mod:`phaselab.channel` modulates symbol frames and pushes waveforms
  through the phase-noise + AWGN channel, with the equivalent discrete
  channel alongside;
* :mod:`phaselab.receiver` projects received waveforms onto basis
  functions and runs the baud-rate matched-filter bank;
* :mod:`phaselab.analysis` estimates spectra, spectral loss, mutual
  information, and convergence behavior;
* :mod:`phaselab.verify` runs the numbered acceptance experiments;
* :mod:`phaselab.cli` exposes all of it as the ``phaselab`` command.
"""

from phaselab.analysis import (
    BankComparison,
    LemmaRow,
    LemmaTable,
    MIEstimate,
    PsdEstimate,
    SpectralLossReport,
    bank_mi_comparison,
    lemma_convergence_table,
    mi_end_to_end,
    mi_gaussian_closed_form,
    mi_monte_carlo,
    psd_welch,
    snr_penalty_db,
    spectral_loss_estimate,
    spectral_loss_report,
)
from phaselab.channel import (
    ChannelConfig,
    Constellation,
    SymbolFrame,
    apply_channel,
    apply_channel_matrix,
    draw_symbol_matrix,
    draw_symbols,
    equivalent_channel,
    load_constellation,
    load_constellation_file,
    modulate,
    modulate_matrix,
)
from phaselab.grid import (
    BasisIndex,
    ConfigError,
    RectangularPulse,
    TimeGrid,
    Waveform,
    eval_basis,
    eval_pulse,
    gram_matrix,
    inner_product,
    make_grid,
)
from phaselab.receiver import (
    basis_projection,
    lemma_projection,
    lemma_projection_given_phase,
    matched_filter_bank,
    matched_filter_matrix,
    projection_bank,
    slot_phase_projection,
)
from phaselab.stochastics import (
    NO_PHASE_NOISE,
    RandomStream,
    UniformCircle,
    WrappedGaussian,
    autocorrelation_estimate,
    mu_theta,
    sample_awgn,
    sample_phase,
)
from phaselab.verify import DEFAULT_SEED, run_verify

__version__ = "0.1.0"

__all__ = [
    "BankComparison",
    "BasisIndex",
    "ChannelConfig",
    "ConfigError",
    "Constellation",
    "DEFAULT_SEED",
    "LemmaRow",
    "LemmaTable",
    "MIEstimate",
    "NO_PHASE_NOISE",
    "PsdEstimate",
    "RandomStream",
    "RectangularPulse",
    "SpectralLossReport",
    "SymbolFrame",
    "TimeGrid",
    "UniformCircle",
    "Waveform",
    "WrappedGaussian",
    "apply_channel",
    "apply_channel_matrix",
    "autocorrelation_estimate",
    "bank_mi_comparison",
    "basis_projection",
    "draw_symbol_matrix",
    "draw_symbols",
    "equivalent_channel",
    "eval_basis",
    "eval_pulse",
    "gram_matrix",
    "inner_product",
    "lemma_convergence_table",
    "lemma_projection",
    "lemma_projection_given_phase",
    "load_constellation",
    "load_constellation_file",
    "make_grid",
    "matched_filter_bank",
    "matched_filter_matrix",
    "mi_end_to_end",
    "mi_gaussian_closed_form",
    "mi_monte_carlo",
    "modulate",
    "modulate_matrix",
    "mu_theta",
    "projection_bank",
    "psd_welch",
    "run_verify",
    "sample_awgn",
    "sample_phase",
    "slot_phase_projection",
    "snr_penalty_db",
    "spectral_loss_estimate",
    "spectral_loss_report",
    "__version__",
]
