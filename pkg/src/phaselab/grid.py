"""Time grids, pulse shaping and basis functions, Riemann-sum inner products.

Everything downstream (modulation, channel, receivers) works on a uniform
sampling of the finite observation window [-S, S): 2l instants t_i = i*delta
with delta = S/l.  The window tiles exactly into symbol slots [m*T, (m+1)*T)
because grid conformity (S/T and T/delta both integral) is enforced at
construction instead of being patched over with interpolation.  That keeps
slot boundaries on sample instants and makes the discrete orthogonality of
the trigonometric basis exact, which the convergence experiments rely on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "ConfigError",
    "TimeGrid",
    "Waveform",
    "RectangularPulse",
    "BasisIndex",
    "make_grid",
    "eval_pulse",
    "eval_basis",
    "basis_slot_samples",
    "inner_product",
    "gram_matrix",
]


class ConfigError(ValueError):
    """A requested configuration violates a conformity requirement."""


def _require_integral(value: float, what: str) -> int:
    n = int(round(value))
    if n < 1 or abs(value - n) > 1e-9 * max(1.0, abs(value)):
        raise ConfigError(f"{what} = {value:g} is not a positive integer")
    return n


@dataclass(frozen=True)
class TimeGrid:
    """Uniform discretization of the window [-S, S) at refinement level l.

    Sample instants are t_i = i*delta for i = -l..l-1 (2l samples) with
    delta = S/l.  Conformity requirements:

    * S/T integral, so symbol slots [m*T, (m+1)*T) tile the window exactly
      (slots m = -S/T .. S/T-1);
    * T/delta integral, so each slot holds a whole number of samples.

    Violations raise :class:`ConfigError` naming the broken divisibility.
    Instances are immutable and safe to share across threads.
    """

    S: float
    l: int
    T: float

    def __post_init__(self) -> None:
        if self.S <= 0:
            raise ConfigError(f"window half-width S = {self.S:g} must be > 0")
        if not isinstance(self.l, (int, np.integer)) or self.l < 1:
            raise ConfigError(f"refinement level l = {self.l!r} must be a positive integer")
        if self.T <= 0:
            raise ConfigError(f"symbol period T = {self.T:g} must be > 0")
        _require_integral(self.S / self.T, "S/T")
        _require_integral(self.T * self.l / self.S, "T/delta = T*l/S")

    @property
    def delta(self) -> float:
        """Sample spacing S/l."""
        return self.S / self.l

    @property
    def size(self) -> int:
        """Number of samples, 2l."""
        return 2 * self.l

    @property
    def slots_per_side(self) -> int:
        """S/T: number of symbol slots on each side of t = 0."""
        return int(round(self.S / self.T))

    @property
    def samples_per_slot(self) -> int:
        """T/delta: number of samples inside one symbol slot."""
        return int(round(self.T * self.l / self.S))

    @cached_property
    def slots(self) -> np.ndarray:
        """Indices m of the symbol slots covering the window, ascending."""
        h = self.slots_per_side
        out = np.arange(-h, h)
        out.setflags(write=False)
        return out

    @cached_property
    def times(self) -> np.ndarray:
        """Sample instants t_i = i*delta, read-only."""
        out = np.arange(-self.l, self.l) * self.delta
        out.setflags(write=False)
        return out

    def contains_slot(self, m: int) -> bool:
        return -self.slots_per_side <= m < self.slots_per_side

    def slot_bounds(self, m: int) -> tuple[int, int]:
        """Array index range [lo, hi) of the samples in slot [m*T, (m+1)*T)."""
        if not self.contains_slot(m):
            raise ValueError(
                f"slot {m} lies outside the window (valid: "
                f"{-self.slots_per_side} .. {self.slots_per_side - 1})"
            )
        p = self.samples_per_slot
        lo = self.l + m * p
        return lo, lo + p


def make_grid(S: float, l: int, T: float) -> TimeGrid:
    """Build a conforming :class:`TimeGrid`; see the class for the rules."""
    return TimeGrid(S=S, l=l, T=T)


@dataclass(frozen=True, eq=False)
class Waveform:
    """Complex samples of a signal on a :class:`TimeGrid`.

    Samples are stored read-only; add/subtract and scalar multiplication are
    provided since receivers are linear maps of waveforms.
    """

    grid: TimeGrid
    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.shape != (self.grid.size,):
            raise ValueError(
                f"waveform has {arr.shape} samples, grid expects ({self.grid.size},)"
            )
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise ValueError("waveform samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __add__(self, other: "Waveform") -> "Waveform":
        _check_same_grid(self, other)
        return Waveform(self.grid, self.samples + other.samples)

    def __sub__(self, other: "Waveform") -> "Waveform":
        _check_same_grid(self, other)
        return Waveform(self.grid, self.samples - other.samples)

    def __mul__(self, scalar: complex) -> "Waveform":
        return Waveform(self.grid, self.samples * scalar)

    __rmul__ = __mul__

    def energy(self) -> float:
        """Riemann approximation of the signal energy, delta * sum |x|^2."""
        return float(self.grid.delta * np.sum(np.abs(self.samples) ** 2))


def _check_same_grid(a: Waveform, b: Waveform) -> None:
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


@dataclass(frozen=True)
class RectangularPulse:
    """Unit-energy square pulse: 1/sqrt(T) on [0, T), zero elsewhere.

    Shifted copies g_k(t) = g(t - k*T) are orthonormal.  The receiver code
    paths only assume a pulse supported on a single symbol slot, so another
    orthonormal-shift pulse can slot in by providing ``slot_samples``.
    """

    T: float

    def __post_init__(self) -> None:
        if self.T <= 0:
            raise ConfigError(f"pulse period T = {self.T:g} must be > 0")

    def slot_samples(self, grid: TimeGrid) -> np.ndarray:
        """Pulse values at the samples of one slot, offsets r*delta, r = 0..p-1."""
        self._check_grid(grid)
        return np.full(grid.samples_per_slot, 1.0 / np.sqrt(self.T), dtype=np.complex128)

    def eval(self, grid: TimeGrid, k: int) -> Waveform:
        """Samples of g_k on the full grid; the slot must lie in the window."""
        lo, hi = grid.slot_bounds(k)
        samples = np.zeros(grid.size, dtype=np.complex128)
        samples[lo:hi] = self.slot_samples(grid)
        return Waveform(grid, samples)

    def _check_grid(self, grid: TimeGrid) -> None:
        if self.T != grid.T:
            raise ConfigError(
                f"pulse period T = {self.T:g} does not match grid symbol period {grid.T:g}"
            )


@dataclass(frozen=True)
class BasisIndex:
    """Double index (n, m): frequency index n >= 0 of the in-slot exponential,
    time shift m in whole symbol slots."""

    n: int
    m: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"frequency index n = {self.n} must be >= 0")


def eval_pulse(pulse: RectangularPulse, k: int, grid: TimeGrid) -> Waveform:
    """Samples of the shifted pulse g_k(t) = g(t - k*T)."""
    return pulse.eval(grid, k)


def basis_slot_samples(n: int, grid: TimeGrid) -> np.ndarray:
    """In-slot samples of the n-th trigonometric basis function on [0, T).

    phi_n(t) = exp(j*2*pi*n*t/T)/sqrt(T); at the slot offsets r*delta this is
    exp(j*2*pi*n*r/p)/sqrt(T), computed from the integer ratio r/p so that
    whole-period sums cancel to machine precision.
    """
    p = grid.samples_per_slot
    if n >= p:
        raise ValueError(
            f"frequency index n = {n} aliases at {p} samples per slot; refine the grid"
        )
    r = np.arange(p)
    return np.exp(2j * np.pi * n * r / p) / np.sqrt(grid.T)


def eval_basis(idx: BasisIndex, grid: TimeGrid) -> Waveform:
    """Samples of phi_{nm}(t) = phi_n(t - m*T); the slot must lie in the window.

    For n = 0 this coincides with the rectangular pulse g_m.
    """
    lo, hi = grid.slot_bounds(idx.m)
    samples = np.zeros(grid.size, dtype=np.complex128)
    samples[lo:hi] = basis_slot_samples(idx.n, grid)
    return Waveform(grid, samples)


def inner_product(a: Waveform, b: Waveform) -> complex:
    """Riemann inner product delta * sum a_i * conj(b_i), approximating
    the L2 inner product of the underlying signals."""
    _check_same_grid(a, b)
    # vdot conjugates its first argument: vdot(b, a) = sum conj(b) * a.
    return complex(a.grid.delta * np.vdot(b.samples, a.samples))


def gram_matrix(indices: list[BasisIndex], grid: TimeGrid) -> np.ndarray:
    """Matrix of pairwise inner products of basis functions.

    For distinct valid indices with n below half the per-slot sample count
    this is the identity to machine precision; duplicated indices show up as
    off-diagonal ones (self-pairings), which is the caller's signal, not an
    error.
    """
    waves = [eval_basis(idx, grid) for idx in indices]
    k = len(waves)
    out = np.empty((k, k), dtype=np.complex128)
    for i in range(k):
        for j in range(k):
            out[i, j] = inner_product(waves[i], waves[j])
    return out
