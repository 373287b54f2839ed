"""Symbol sources, pulse-train modulation, and the phase-noise + AWGN channel.

The waveform channel multiplies the transmitted signal by a unimodular
white phase process and adds calibrated complex Gaussian noise:

    y_i = x_i * exp(j*theta_i) + w_i        (i over grid samples)

with theta i.i.d. across samples.  Its discrete-time counterpart, the
equivalent channel, acts directly on the symbols:

    Y_k = mu * A_k + W_k,   W_k ~ CN(0, N0),  mu = E[e^{j*Theta}]

which is what the baud-rate matched-filter bank tends to as the grid is
refined.  The equivalent channel is deliberately a separate code path, not
a flag on the waveform channel: it serves as the oracle the waveform
pipeline is tested against, so they must not share implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from phaselab.grid import ConfigError, RectangularPulse, TimeGrid, Waveform
from phaselab.stochastics import (
    PhaseModel,
    RandomStream,
    WrappedGaussian,
    as_generator,
    awgn_matrix,
    mu_theta,
    sample_phase,
)

__all__ = [
    "Constellation",
    "load_constellation",
    "load_constellation_file",
    "SymbolFrame",
    "ChannelConfig",
    "draw_symbols",
    "modulate",
    "apply_channel",
    "equivalent_channel",
]


@dataclass(frozen=True)
class Constellation:
    """A symbol alphabet with point probabilities, normalized so the average
    energy sum_i p_i |x_i|^2 is exactly 1.

    ``points`` is None for the circularly symmetric Gaussian input, which is
    continuous (probabilities do not apply).  ``probabilities`` defaults to
    uniform.
    """

    name: str
    points: np.ndarray | None
    probabilities: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.points is None:
            if self.probabilities is not None:
                raise ValueError("a continuous Gaussian input takes no point probabilities")
            return
        pts = np.asarray(self.points, dtype=np.complex128)
        if pts.ndim != 1 or pts.size < 1:
            raise ValueError("constellation points must form a nonempty 1-d sequence")
        if self.probabilities is None:
            probs = np.full(pts.size, 1.0 / pts.size)
        else:
            probs = np.asarray(self.probabilities, dtype=np.float64)
            if probs.shape != pts.shape:
                raise ValueError("need exactly one probability per constellation point")
            if np.any(probs < 0):
                raise ValueError("point probabilities must be nonnegative")
            total = probs.sum()
            if abs(total - 1.0) > 1e-6:
                raise ValueError(f"point probabilities sum to {total:.8g}, expected 1")
            probs = probs / total
        energy = float(np.sum(probs * np.abs(pts) ** 2))
        if energy <= 0:
            raise ValueError("constellation has zero average energy")
        if abs(energy - 1.0) > 1e-12:
            pts = pts / math.sqrt(energy)
        pts.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "probabilities", probs)

    @property
    def is_gaussian(self) -> bool:
        return self.points is None

    def entropy_bits(self) -> float:
        """Source entropy H(A) in bits; the noiseless mutual information."""
        if self.points is None:
            raise ValueError("a continuous Gaussian input has no finite entropy in bits")
        p = self.probabilities[self.probabilities > 0]
        return float(-np.sum(p * np.log2(p)))


def _square_qam(side: int) -> np.ndarray:
    level = np.arange(-(side - 1), side, 2, dtype=np.float64)
    re, im = np.meshgrid(level, level)
    return (re + 1j * im).ravel()


_CONSTELLATIONS: dict[str, Constellation] = {
    "bpsk": Constellation("bpsk", np.array([-1.0, 1.0])),
    "qpsk": Constellation("qpsk", _square_qam(2)),
    "qam16": Constellation("qam16", _square_qam(4)),
    "gaussian": Constellation("gaussian", None),
}


def load_constellation(name: str) -> Constellation:
    """Look up a built-in alphabet: bpsk, qpsk, qam16, or gaussian."""
    key = name.strip().lower().replace("-", "")
    if key == "16qam":
        key = "qam16"
    try:
        return _CONSTELLATIONS[key]
    except KeyError:
        known = ", ".join(sorted(_CONSTELLATIONS))
        raise ValueError(f"unknown constellation {name!r} (known: {known})") from None


def load_constellation_file(path: str | Path) -> Constellation:
    """Read a custom alphabet from a plain-text file.

    One point per line as ``re im prob``, with ``#`` starting a comment.
    Points are renormalized to unit average energy like the built-ins.
    """
    path = Path(path)
    points: list[complex] = []
    probs: list[float] = []
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ValueError(f"{path}:{line_no}: expected 're im prob', got {raw!r}")
        try:
            re, im, prob = (float(f) for f in fields)
        except ValueError:
            raise ValueError(f"{path}:{line_no}: non-numeric field in {raw!r}") from None
        points.append(complex(re, im))
        probs.append(prob)
    if not points:
        raise ValueError(f"{path}: no constellation points found")
    return Constellation(path.stem, np.array(points), np.array(probs))


@dataclass(frozen=True)
class SymbolFrame:
    """A block of symbols A_m occupying consecutive symbol slots.

    Frames are centered on slot 0: a frame of 2M + 1 symbols occupies
    slots -M..M.  (Even lengths start at -len//2.)
    """

    symbols: np.ndarray

    def __post_init__(self) -> None:
        arr = np.atleast_1d(np.asarray(self.symbols, dtype=np.complex128))
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a frame needs a nonempty 1-d symbol sequence")
        arr.setflags(write=False)
        object.__setattr__(self, "symbols", arr)

    @property
    def start(self) -> int:
        """Slot index of the first symbol."""
        return -(self.symbols.size // 2)

    @property
    def slots(self) -> np.ndarray:
        """Slot indices the frame occupies, ascending."""
        return self.start + np.arange(self.symbols.size)

    def symbol_at(self, m: int) -> complex:
        pos = m - self.start
        if not 0 <= pos < self.symbols.size:
            raise ValueError(f"frame occupies slots {self.start}..{-self.start - 1}, not {m}")
        return complex(self.symbols[pos])


def draw_symbols(
    c: Constellation,
    Es: float,
    M: int,
    rng: RandomStream | np.random.Generator,
) -> SymbolFrame:
    """Frame of 2M + 1 i.i.d. symbols with average energy Es."""
    if M < 0:
        raise ValueError(f"frame half-length M = {M} must be >= 0")
    return SymbolFrame(draw_symbol_matrix(c, Es, (2 * M + 1,), rng))


def draw_symbol_matrix(
    c: Constellation,
    Es: float,
    size: int | tuple[int, ...],
    rng: RandomStream | np.random.Generator,
) -> np.ndarray:
    """Raw i.i.d. symbol draws of any shape; the batched form of
    :func:`draw_symbols`."""
    if Es < 0 or not math.isfinite(Es):
        raise ValueError(f"symbol energy Es = {Es!r} must be finite and >= 0")
    gen = as_generator(rng)
    root = math.sqrt(Es)
    if c.is_gaussian:
        shape = (size,) if isinstance(size, int) else tuple(size)
        raw = gen.normal(0.0, math.sqrt(0.5), size=shape + (2,))
        return root * (raw[..., 0] + 1j * raw[..., 1])
    if np.allclose(c.probabilities, c.probabilities[0]):
        idx = gen.integers(0, c.points.size, size=size)
    else:
        idx = gen.choice(c.points.size, size=size, p=c.probabilities)
    return root * c.points[idx]


def frame_columns(frame_len: int, grid: TimeGrid) -> slice:
    """Column range of a centered frame's slots inside full-window,
    slot-indexed arrays (matched-filter outputs, projection banks)."""
    start = -(frame_len // 2)
    first = start + grid.slots_per_side
    if first < 0 or start + frame_len - 1 >= grid.slots_per_side:
        raise ValueError(
            f"frame of {frame_len} symbols exceeds the window "
            f"({grid.slots.size} slots)"
        )
    return slice(first, first + frame_len)


def modulate(
    frame: SymbolFrame,
    grid: TimeGrid,
    pulse: RectangularPulse | None = None,
) -> Waveform:
    """Pulse train X(t) = sum_m A_m g(t - mT) sampled on the grid.

    Slots the frame does not occupy are zero.  Raises when the frame does
    not fit inside the window.
    """
    return Waveform(grid, modulate_matrix(frame.symbols[np.newaxis, :], grid, pulse)[0])


def modulate_matrix(
    symbols: np.ndarray,
    grid: TimeGrid,
    pulse: RectangularPulse | None = None,
) -> np.ndarray:
    """Batched :func:`modulate`: rows of centered-frame symbols to rows of
    waveform samples."""
    if pulse is None:
        pulse = RectangularPulse(grid.T)
    cols = frame_columns(symbols.shape[1], grid)
    slot = pulse.slot_samples(grid)
    p = grid.samples_per_slot
    out = np.zeros((symbols.shape[0], grid.size), dtype=np.complex128)
    filled = (symbols[:, :, np.newaxis] * slot[np.newaxis, np.newaxis, :]).reshape(
        symbols.shape[0], symbols.shape[1] * p
    )
    out[:, cols.start * p : cols.stop * p] = filled
    return out


@dataclass(frozen=True)
class ChannelConfig:
    """One experiment's channel description: grid, phase model, noise
    density, symbol energy, pulse, and the master seed for its random
    streams."""

    grid: TimeGrid
    phase: PhaseModel
    N0: float
    Es: float = 1.0
    pulse: RectangularPulse | None = None
    seed: int = 7

    def __post_init__(self) -> None:
        if self.N0 < 0 or not math.isfinite(self.N0):
            raise ValueError(f"noise density N0 = {self.N0!r} must be finite and >= 0")
        if self.Es < 0 or not math.isfinite(self.Es):
            raise ValueError(f"symbol energy Es = {self.Es!r} must be finite and >= 0")
        if self.pulse is None:
            object.__setattr__(self, "pulse", RectangularPulse(self.grid.T))
        elif self.pulse.T != self.grid.T:
            raise ConfigError(
                f"pulse period {self.pulse.T:g} does not match grid symbol period "
                f"{self.grid.T:g}"
            )

    @property
    def mu(self) -> complex:
        return mu_theta(self.phase)

    @property
    def snr(self) -> float:
        """Es/N0 before any phase-noise penalty."""
        return math.inf if self.N0 == 0 else self.Es / self.N0

    def stream(self, stream_id: int, *branch: int) -> RandomStream:
        return RandomStream(self.seed, stream_id, tuple(branch))


def apply_channel(
    X: Waveform,
    cfg: ChannelConfig,
    rng: RandomStream | np.random.Generator,
) -> Waveform:
    """Push one waveform through the channel: Y = X * e^{j*Theta} + W.

    Phase is drawn before noise, one block each, so a seeded stream
    reproduces the exact realization.
    """
    if X.grid != cfg.grid:
        raise ValueError(f"waveform grid {X.grid} differs from channel grid {cfg.grid}")
    return Waveform(cfg.grid, apply_channel_matrix(X.samples[np.newaxis, :], cfg, rng)[0])


def apply_channel_matrix(
    X: np.ndarray,
    cfg: ChannelConfig,
    rng: RandomStream | np.random.Generator,
) -> np.ndarray:
    """Batched :func:`apply_channel`: rows of transmitted samples to rows of
    received samples, with the same per-batch draw order (phase block, then
    noise block)."""
    gen = as_generator(rng)
    if isinstance(cfg.phase, WrappedGaussian) and cfg.phase.sigma2 == 0.0:
        rotated = X
    else:
        rotated = X * np.exp(1j * sample_phase(cfg.phase, X.shape, gen))
    if cfg.N0 == 0.0:
        return rotated if rotated is not X else X.copy()
    return rotated + awgn_matrix(cfg.grid, cfg.N0, X.shape[0], gen)


def equivalent_channel(
    frame: SymbolFrame | np.ndarray,
    mu: complex,
    N0: float,
    rng: RandomStream | np.random.Generator,
) -> np.ndarray:
    """The discrete memoryless oracle channel: Y = mu * A + CN(0, N0).

    Accepts a frame or a raw symbol array of any shape; returns outputs of
    the same shape.  With mu = 0 the output is independent of the input,
    the no-reliable-communication regime.
    """
    symbols = frame.symbols if isinstance(frame, SymbolFrame) else np.asarray(frame)
    symbols = symbols.astype(np.complex128, copy=False)
    if N0 < 0 or not math.isfinite(N0):
        raise ValueError(f"noise density N0 = {N0!r} must be finite and >= 0")
    if N0 == 0.0:
        return mu * symbols
    gen = as_generator(rng)
    raw = gen.normal(0.0, math.sqrt(N0 / 2.0), size=symbols.shape + (2,))
    return mu * symbols + raw[..., 0] + 1j * raw[..., 1]
