"""Spectral, information-rate, and convergence estimators."""

import math

import numpy as np
import pytest

from phaselab import (
    BasisIndex,
    ChannelConfig,
    MIEstimate,
    RandomStream,
    SymbolFrame,
    UniformCircle,
    WrappedGaussian,
    bank_mi_comparison,
    lemma_convergence_table,
    load_constellation,
    make_grid,
    mi_end_to_end,
    mi_gaussian_closed_form,
    mi_monte_carlo,
    modulate,
    mu_theta,
    psd_welch,
    snr_penalty_db,
    spectral_loss_estimate,
    spectral_loss_report,
)

# Frozen closed-form values, derived once from the defining expressions:
#   log2(1 + |mu|^2 Es / N0) at Es = 1, N0 = 0.1, mu = exp(-1/2)
CLOSED_FORM_PENALIZED = 2.2261368374359103
#   -10 log10(|mu|^2) at sigma^2 = 1, i.e. 10 * log10(e)
PENALTY_DB_UNIT_SIGMA = 4.342944819032518


def test_closed_form_values():
    awgn = mi_gaussian_closed_form(1.0, 0.1, 1.0)
    assert awgn.value == pytest.approx(math.log2(11.0), abs=1e-12)
    assert awgn.stderr == 0.0 and awgn.method == "closed_form"
    lossy = mi_gaussian_closed_form(1.0, 0.1, mu_theta(WrappedGaussian(1.0)))
    assert lossy.value == pytest.approx(CLOSED_FORM_PENALIZED, abs=1e-12)


def test_closed_form_monotone_in_mu():
    values = [mi_gaussian_closed_form(1.0, 0.1, mu).value
              for mu in (0.2, 0.5, 0.8, 1.0)]
    assert values == sorted(values)


def test_closed_form_rejects_bad_noise():
    with pytest.raises(ValueError):
        mi_gaussian_closed_form(1.0, 0.0, 1.0)


def test_snr_penalty_values():
    penalty = snr_penalty_db(WrappedGaussian(0.0))
    assert penalty == 0.0 and math.copysign(1.0, penalty) == 1.0
    assert snr_penalty_db(WrappedGaussian(1.0)) == pytest.approx(
        PENALTY_DB_UNIT_SIGMA, abs=1e-12)
    assert snr_penalty_db(UniformCircle()) == math.inf


def test_mi_estimate_validation():
    with pytest.raises(ValueError):
        MIEstimate(1.0, 0.5, 100, "closed_form")


def test_mi_monte_carlo_reproducible_and_sane():
    qpsk = load_constellation("qpsk")
    a = mi_monte_carlo(qpsk, 1.0, 1.0, 0.1, 50_000, RandomStream(7))
    b = mi_monte_carlo(qpsk, 1.0, 1.0, 0.1, 50_000, RandomStream(7))
    assert a.value == b.value and a.stderr == b.stderr
    assert 0.0 < a.value <= 2.0
    assert a.method == "monte_carlo" and a.trials == 50_000


def test_mi_monte_carlo_bpsk_saturates():
    bpsk = load_constellation("bpsk")
    est = mi_monte_carlo(bpsk, 1.0, 1.0, 0.01, 20_000, RandomStream(8))
    assert est.value == pytest.approx(1.0, abs=0.01)


def test_mi_monte_carlo_degenerate_inputs():
    qpsk = load_constellation("qpsk")
    noiseless = mi_monte_carlo(qpsk, 1.0, 1.0, 0.0, 10, RandomStream(9))
    assert noiseless.value == 2.0 and noiseless.method == "closed_form"
    blind = mi_monte_carlo(qpsk, 0.0, 1.0, 0.0, 10, RandomStream(9))
    assert blind.value == 0.0
    # mu = 0 makes every class metric identical; scores cancel to rounding
    dark = mi_monte_carlo(qpsk, 0.0, 1.0, 0.1, 20_000, RandomStream(10))
    assert abs(dark.value) < 1e-12 and dark.stderr < 1e-12


def test_mi_monte_carlo_rejects_continuous_input():
    gauss = load_constellation("gaussian")
    with pytest.raises(ValueError, match="closed"):
        mi_monte_carlo(gauss, 1.0, 1.0, 0.1, 100, RandomStream(0))


def test_mi_end_to_end_requires_noise():
    grid = make_grid(2.0, 64, 1.0)
    cfg = ChannelConfig(grid, WrappedGaussian(0.5), N0=0.0)
    with pytest.raises(ValueError):
        mi_end_to_end(cfg, load_constellation("qpsk"), 10, RandomStream(0))


def test_mi_end_to_end_reduces_to_awgn():
    # zero phase variance: the waveform pipeline is a plain AWGN simulation
    grid = make_grid(2.0, 64, 1.0)
    cfg = ChannelConfig(grid, WrappedGaussian(0.0), N0=0.2, Es=1.0, seed=3)
    qpsk = load_constellation("qpsk")
    pipe = mi_end_to_end(cfg, qpsk, 4_000, cfg.stream(1))
    ref = mi_monte_carlo(qpsk, 1.0, 1.0, 0.2, 100_000, RandomStream(4))
    assert abs(pipe.value - ref.value) < 3 * math.hypot(pipe.stderr, ref.stderr)


def test_psd_density_integrates_to_power():
    # constant-modulus waveform: integral of the density equals mean power
    grid = make_grid(64.0, 2**11, 1.0)
    gen = RandomStream(11).generator()
    symbols = load_constellation("qpsk").points[
        gen.integers(0, 4, grid.slots.size)]
    y = modulate(SymbolFrame(symbols), grid)
    est = psd_welch(y, segment=256)
    power = float(np.mean(np.abs(y.samples) ** 2))
    assert est.total_power() == pytest.approx(power, rel=1e-9)
    assert np.all(np.diff(est.frequencies) > 0)
    assert est.band_power(1.0) <= est.total_power() + 1e-12
    assert est.floor_level(3.0) >= 0.0


def test_spectral_loss_close_to_target():
    grid = make_grid(256.0, 2**12, 1.0)
    cfg = ChannelConfig(grid, WrappedGaussian(0.5), N0=0.0, Es=1.0, seed=5)
    ratio = spectral_loss_estimate(cfg, trials=4)
    assert ratio == pytest.approx(math.exp(-0.5), rel=0.1)


def test_spectral_loss_input_validation():
    grid = make_grid(256.0, 2**12, 1.0)
    with pytest.raises(ValueError):
        spectral_loss_report(
            ChannelConfig(grid, UniformCircle(), N0=0.0), trials=2)
    small = make_grid(4.0, 64, 1.0)
    with pytest.raises(ValueError):
        spectral_loss_report(
            ChannelConfig(small, WrappedGaussian(0.5), N0=0.0), trials=2)


def test_lemma_variance_matches_double_sum_oracle():
    # independent oracle: E|V|^2 - |EV|^2 with E e^{j(th_r - th_r')} written
    # out over the full double sum of slot samples
    sigma2 = 0.8
    grid = make_grid(2.0, 128, 1.0)
    p = grid.samples_per_slot
    n = 1
    omega = np.exp(-2j * np.pi * n * np.arange(p) / p)
    scale = grid.delta / grid.T
    cross = math.exp(-sigma2) * (np.abs(omega.sum()) ** 2 - p)
    second_moment = scale**2 * (p + cross)
    first_moment = scale * math.exp(-sigma2 / 2) * omega.sum()
    var_oracle = second_moment - abs(first_moment) ** 2

    table = lemma_convergence_table(
        0, BasisIndex(n, 0), WrappedGaussian(sigma2), (64, 128), 6_000,
        RandomStream(12), S=2.0, T=1.0)
    got = table.rows[-1].variance
    se = var_oracle * math.sqrt(2.0 / 6_000)  # chi-square spread
    assert got == pytest.approx(var_oracle, abs=4 * se)


def test_lemma_table_structure_and_mean():
    model = WrappedGaussian(1.0)
    ladder = (64, 128, 256)
    table = lemma_convergence_table(
        0, BasisIndex(0, 0), model, ladder, 2_000, RandomStream(13),
        S=2.0, T=1.0)
    assert tuple(row.l for row in table.rows) == ladder
    assert table.limit == pytest.approx(mu_theta(model), abs=1e-12)
    final = table.rows[-1]
    assert abs(final.mean - table.limit) < 4 * final.stderr
    # variance shrinks linearly with refinement
    ratio = table.rows[0].variance / table.rows[-1].variance
    assert ratio == pytest.approx(4.0, rel=0.3)


def test_lemma_table_nested_path_is_trial_zero():
    args = (0, BasisIndex(0, 0), WrappedGaussian(0.5), (64, 128), 50,
            RandomStream(14))
    a = lemma_convergence_table(*args, S=2.0, T=1.0)
    b = lemma_convergence_table(*args, S=2.0, T=1.0)
    assert [r.nested for r in a.rows] == [r.nested for r in b.rows]


def test_lemma_table_validates_ladder():
    model = WrappedGaussian(0.5)
    idx = BasisIndex(0, 0)
    with pytest.raises(ValueError):
        lemma_convergence_table(0, idx, model, (128, 64), 10, RandomStream(0))
    with pytest.raises(ValueError):
        lemma_convergence_table(0, idx, model, (96, 128), 10, RandomStream(0))
    with pytest.raises(ValueError):
        lemma_convergence_table(0, idx, model, (), 10, RandomStream(0))


def test_bank_comparison_shapes_and_determinism():
    grid = make_grid(2.0, 64, 1.0)
    cfg = ChannelConfig(grid, WrappedGaussian(0.5), N0=0.2, Es=1.0, seed=15)
    qpsk = load_constellation("qpsk")
    a = bank_mi_comparison(cfg, qpsk, 3, 4_000, cfg.stream(1))
    b = bank_mi_comparison(cfg, qpsk, 3, 4_000, cfg.stream(1))
    assert a.difference == b.difference
    assert a.branch_means.shape == (4,)  # branches 0..n_max
    assert a.branch_mean_stderr.shape == (4,)
    assert a.n_max == 3
    assert 0 < a.train_samples < 12_000  # 4000 frames x 3 symbols each
    # higher branches are pure noise: means small in stderr units
    assert np.all(np.abs(a.branch_means[1:]) < 5 * a.branch_mean_stderr[1:])
    assert abs(a.difference) < 0.05
