"""Constellations, symbol frames, modulation, and the channel itself."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaselab import (
    ChannelConfig,
    ConfigError,
    Constellation,
    RandomStream,
    RectangularPulse,
    SymbolFrame,
    UniformCircle,
    WrappedGaussian,
    apply_channel,
    apply_channel_matrix,
    draw_symbol_matrix,
    draw_symbols,
    equivalent_channel,
    load_constellation,
    load_constellation_file,
    make_grid,
    modulate,
    modulate_matrix,
)


@pytest.mark.parametrize("name, size, entropy", [
    ("bpsk", 2, 1.0), ("qpsk", 4, 2.0), ("16qam", 16, 4.0),
])
def test_builtin_constellations(name, size, entropy):
    c = load_constellation(name)
    assert c.points.size == size
    energy = np.sum(c.probabilities * np.abs(c.points) ** 2)
    assert energy == pytest.approx(1.0, abs=1e-12)
    assert c.entropy_bits() == pytest.approx(entropy, abs=1e-12)


def test_load_constellation_aliases_and_unknown():
    assert load_constellation("16-QAM").points.size == 16
    assert load_constellation("QPSK").points.size == 4
    assert load_constellation("gaussian").points is None
    with pytest.raises(ValueError):
        load_constellation("128apsk")


def test_constellation_normalizes_energy():
    c = Constellation("scaled", [3.0, -3.0])
    np.testing.assert_allclose(np.abs(c.points), 1.0)


def test_constellation_probability_validation():
    with pytest.raises(ValueError):
        Constellation("bad", [1.0, -1.0], [0.9, 0.2])
    with pytest.raises(ValueError):
        Constellation("bad", [1.0, -1.0], [1.1, -0.1])
    with pytest.raises(ValueError):
        Constellation("bad", [1.0, -1.0], [0.5])


def test_nonuniform_entropy():
    c = Constellation("skew", [1.0, -1.0], [0.25, 0.75])
    want = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))
    assert c.entropy_bits() == pytest.approx(want, abs=1e-12)


def test_load_constellation_file(tmp_path):
    path = tmp_path / "points.txt"
    path.write_text("# two points\n1.0 0.0 0.5\n-1.0 0.0 0.5\n")
    c = load_constellation_file(path)
    assert c.points.size == 2
    np.testing.assert_allclose(c.probabilities, 0.5)


def test_load_constellation_file_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1.0 0.0 0.5\n1.0 oops 0.5\n")
    with pytest.raises(ValueError, match="bad.txt:2"):
        load_constellation_file(bad)
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing here\n")
    with pytest.raises(ValueError, match="no constellation points"):
        load_constellation_file(empty)


def test_symbol_frame_centered_indexing():
    frame = SymbolFrame(np.array([1.0, 2.0, 3.0], dtype=complex))
    assert frame.start == -1
    np.testing.assert_array_equal(frame.slots, [-1, 0, 1])
    assert frame.symbol_at(-1) == 1.0
    assert frame.symbol_at(1) == 3.0
    with pytest.raises(ValueError):
        frame.symbol_at(2)


def test_draw_symbols_singleton_deterministic():
    c = Constellation("point", [1.0])
    frame = draw_symbols(c, 4.0, 1, RandomStream(0))
    np.testing.assert_allclose(frame.symbols, [2.0, 2.0, 2.0])


def test_draw_symbols_qpsk_statistics():
    c = load_constellation("qpsk")
    frame = draw_symbols(c, 1.0, 50_000, RandomStream(1))
    assert frame.symbols.size == 100_001
    energy = np.mean(np.abs(frame.symbols) ** 2)
    assert energy == pytest.approx(1.0, abs=4 / math.sqrt(frame.symbols.size))
    assert abs(frame.symbols.mean()) < 4 / math.sqrt(frame.symbols.size)


def test_draw_symbol_matrix_gaussian_energy():
    c = load_constellation("gaussian")
    draws = draw_symbol_matrix(c, 2.0, (200, 50), RandomStream(2))
    assert draws.shape == (200, 50)
    assert np.mean(np.abs(draws) ** 2) == pytest.approx(2.0, rel=0.05)


def test_draw_symbol_matrix_respects_probabilities():
    c = Constellation("skew", [1.0, -1.0], [0.25, 0.75])
    draws = draw_symbol_matrix(c, 1.0, 40_000, RandomStream(3))
    frac = np.mean(draws.real < 0)
    assert frac == pytest.approx(0.75, abs=0.01)


def test_modulate_piecewise_constant():
    grid = make_grid(4.0, 32, 1.0)  # slots -2..1, 8 samples each
    frame = SymbolFrame(np.array([1.0, 2.0, 3.0], dtype=complex))  # slots -1..1
    w = modulate(frame, grid)
    sqrt_t = math.sqrt(grid.T)
    lo, hi = grid.slot_bounds(-2)
    np.testing.assert_array_equal(w.samples[lo:hi], 0.0)
    for m, a in zip(frame.slots, frame.symbols):
        lo, hi = grid.slot_bounds(int(m))
        np.testing.assert_allclose(w.samples[lo:hi], a / sqrt_t)


def test_modulate_matrix_matches_single():
    grid = make_grid(4.0, 32, 1.0)
    rng = RandomStream(4).generator()
    symbols = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    stack = modulate_matrix(symbols, grid)
    for row in range(5):
        single = modulate(SymbolFrame(symbols[row]), grid)
        np.testing.assert_array_equal(stack[row], single.samples)


def test_frame_too_long_rejected():
    grid = make_grid(1.0, 16, 1.0)  # window [-1, 1): slots -1 and 0 only
    with pytest.raises(ValueError, match="exceeds the window"):
        modulate(SymbolFrame(np.ones(3, dtype=complex)), grid)


def test_channel_config_properties_and_validation():
    grid = make_grid(2.0, 16, 1.0)
    cfg = ChannelConfig(grid, WrappedGaussian(1.0), N0=0.25, Es=2.0)
    assert cfg.mu == pytest.approx(math.exp(-0.5))
    assert cfg.snr == pytest.approx(8.0)
    assert isinstance(cfg.pulse, RectangularPulse)
    zero_noise = ChannelConfig(grid, UniformCircle(), N0=0.0)
    assert math.isinf(zero_noise.snr)
    quiet = WrappedGaussian(0.0)
    with pytest.raises(ValueError):
        ChannelConfig(grid, quiet, N0=-1.0)
    with pytest.raises(ConfigError):
        ChannelConfig(grid, quiet, N0=0.1, pulse=RectangularPulse(0.5))


def test_channel_config_streams_are_stable():
    grid = make_grid(2.0, 16, 1.0)
    cfg = ChannelConfig(grid, WrappedGaussian(0.5), N0=0.1, seed=9)
    a = cfg.stream(1).generator().standard_normal(4)
    b = cfg.stream(1).generator().standard_normal(4)
    c = cfg.stream(2).generator().standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_apply_channel_identity_when_degenerate():
    grid = make_grid(2.0, 16, 1.0)
    cfg = ChannelConfig(grid, WrappedGaussian(0.0), N0=0.0)
    frame = SymbolFrame(np.array([1.0 + 1j, -1.0], dtype=complex))
    x = modulate(frame, grid)
    y = apply_channel(x, cfg, RandomStream(5))
    np.testing.assert_array_equal(y.samples, x.samples)


def test_apply_channel_pure_phase_preserves_modulus():
    grid = make_grid(2.0, 16, 1.0)
    cfg = ChannelConfig(grid, WrappedGaussian(0.8), N0=0.0)
    frame = SymbolFrame(np.array([1.0 + 1j, -1.0], dtype=complex))
    x = modulate(frame, grid)
    y = apply_channel(x, cfg, RandomStream(6))
    np.testing.assert_allclose(np.abs(y.samples), np.abs(x.samples), atol=1e-12)
    assert not np.allclose(y.samples, x.samples)


def test_apply_channel_grid_mismatch():
    cfg = ChannelConfig(make_grid(2.0, 16, 1.0), WrappedGaussian(0.5), N0=0.1)
    other = modulate(SymbolFrame(np.ones(1, dtype=complex)), make_grid(2.0, 8, 1.0))
    with pytest.raises(ValueError):
        apply_channel(other, cfg, RandomStream(0))


def test_apply_channel_matrix_shape_and_noise_level():
    grid = make_grid(2.0, 64, 1.0)
    cfg = ChannelConfig(grid, WrappedGaussian(0.0), N0=0.4)
    x = np.zeros((2_000, grid.size), dtype=complex)
    y = apply_channel_matrix(x, cfg, RandomStream(7).generator())
    assert y.shape == x.shape
    power = np.mean(np.abs(y) ** 2)
    assert power == pytest.approx(0.4 / grid.delta, rel=0.05)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_equivalent_channel_zero_noise_exact(seed):
    symbols = RandomStream(seed).generator().standard_normal(6) + 0j
    out = equivalent_channel(symbols, 0.5, 0.0, RandomStream(seed, 1).generator())
    np.testing.assert_array_equal(out, 0.5 * symbols)


def test_equivalent_channel_moments():
    gen = RandomStream(8).generator()
    symbols = np.full((100_000,), 1.0 + 1j)
    mu, n0 = 0.6, 0.3
    out = equivalent_channel(symbols, mu, n0, gen)
    se_mean = math.sqrt(n0 / symbols.size)
    assert abs(out.mean() - mu * (1 + 1j)) < 4 * se_mean
    var = np.mean(np.abs(out - out.mean()) ** 2)
    assert var == pytest.approx(n0, rel=0.05)
