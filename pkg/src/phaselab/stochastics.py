"""Phase-noise models, calibrated complex AWGN, reproducible random streams.

The phase process is white: samples at distinct grid instants are mutually
independent, so a phase realization on a grid is just an i.i.d. vector.
Models are identified by the distribution of the phase at a single instant.

Noise calibration works in integral scale.  The Riemann inner product
``delta * sum`` stands in for an integral, and projecting white noise of
one-sided density N0 onto a unit-norm function must leave variance N0.
With independent complex Gaussian samples of variance N0/delta per sample,
Var(delta * sum w_i * conj(phi_i)) = delta^2 * (N0/delta) * sum|phi_i|^2
= N0 * delta * sum|phi_i|^2, which is N0 exactly when phi has unit
Riemann norm.  This holds at every refinement level, not just in a limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from phaselab.grid import TimeGrid, Waveform

__all__ = [
    "WrappedGaussian",
    "UniformCircle",
    "NO_PHASE_NOISE",
    "PhaseModel",
    "RandomStream",
    "as_generator",
    "mu_theta",
    "sample_phase",
    "sample_awgn",
    "autocorrelation_estimate",
]


@dataclass(frozen=True)
class WrappedGaussian:
    """Phase distributed as a Gaussian with variance sigma2, wrapped to the
    circle.  Wrapping does not change e^{j*theta}, so the first circular
    moment is exp(-sigma2/2) exactly; sigma2 = 0 degenerates to no phase
    noise."""

    sigma2: float

    def __post_init__(self) -> None:
        if self.sigma2 < 0 or not math.isfinite(self.sigma2):
            raise ValueError(f"phase variance sigma2 = {self.sigma2!r} must be finite and >= 0")


@dataclass(frozen=True)
class UniformCircle:
    """Phase uniform on [-pi, pi): the fully non-coherent case, first
    circular moment zero."""


PhaseModel = WrappedGaussian | UniformCircle

NO_PHASE_NOISE = WrappedGaussian(0.0)


def mu_theta(model: PhaseModel) -> complex:
    """First circular moment E[e^{j*Theta}] of the phase at one instant."""
    if isinstance(model, WrappedGaussian):
        return complex(math.exp(-model.sigma2 / 2.0))
    if isinstance(model, UniformCircle):
        return 0j
    raise TypeError(f"unknown phase model: {model!r}")


@dataclass(frozen=True)
class RandomStream:
    """Named, branchable source of reproducible randomness.

    Streams are identified by (master_seed, stream_id, branch).  Distinct
    identities give statistically independent Philox streams; equal
    identities reproduce the same draws bit for bit, regardless of what any
    other stream consumed.  ``substream`` derives child identities, e.g.
    one per Monte Carlo chunk, so batch size and evaluation order cannot
    perturb results.
    """

    master_seed: int
    stream_id: int = 0
    branch: tuple[int, ...] = field(default_factory=tuple)

    def substream(self, *branch: int) -> "RandomStream":
        return RandomStream(self.master_seed, self.stream_id, self.branch + branch)

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id, *self.branch))
        return np.random.Generator(np.random.Philox(seq))


def as_generator(rng: RandomStream | np.random.Generator) -> np.random.Generator:
    """Accept either a stream identity or a live generator.

    A RandomStream yields a fresh generator (same draws every call); a
    Generator passes through and keeps advancing, for callers that thread
    one source through several sampling steps.
    """
    if isinstance(rng, RandomStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RandomStream or numpy Generator, got {type(rng).__name__}")


def sample_phase(
    model: PhaseModel,
    size: int | tuple[int, ...] | TimeGrid,
    rng: RandomStream | np.random.Generator,
) -> np.ndarray:
    """Draw i.i.d. phase samples; independence across instants is the
    defining property of the white phase process.

    ``size`` may be a TimeGrid (one sample per grid instant) or any array
    shape.  Gaussian draws are left unwrapped: e^{j*theta} is 2*pi-periodic,
    so wrapping changes nothing observable and is skipped.
    """
    if isinstance(size, TimeGrid):
        size = size.size
    gen = as_generator(rng)
    if isinstance(model, WrappedGaussian):
        if model.sigma2 == 0.0:
            return np.zeros(size, dtype=np.float64)
        return gen.normal(0.0, math.sqrt(model.sigma2), size=size)
    if isinstance(model, UniformCircle):
        return gen.uniform(-np.pi, np.pi, size=size)
    raise TypeError(f"unknown phase model: {model!r}")


def sample_awgn(
    grid: TimeGrid,
    N0: float,
    rng: RandomStream | np.random.Generator,
) -> Waveform:
    """Circularly symmetric complex AWGN calibrated to the grid.

    Per-sample variance is N0/delta (split evenly between real and
    imaginary parts) so that the Riemann projection onto any unit-norm
    waveform has variance exactly N0.  N0 = 0 returns the zero waveform.
    """
    samples = awgn_matrix(grid, N0, 1, rng)[0]
    return Waveform(grid, samples)


def awgn_matrix(
    grid: TimeGrid,
    N0: float,
    n_rows: int,
    rng: RandomStream | np.random.Generator,
) -> np.ndarray:
    """Matrix of independent AWGN realizations, one per row; the batched
    form of :func:`sample_awgn` for Monte Carlo kernels."""
    if N0 < 0 or not math.isfinite(N0):
        raise ValueError(f"noise density N0 = {N0!r} must be finite and >= 0")
    shape = (n_rows, grid.size)
    if N0 == 0.0:
        return np.zeros(shape, dtype=np.complex128)
    gen = as_generator(rng)
    scale = math.sqrt(N0 / grid.delta / 2.0)
    # One interleaved draw, split into real/imag: half the RNG calls of two
    # separate normal() passes and identical for identical stream identity.
    raw = gen.normal(0.0, scale, size=(n_rows, 2 * grid.size))
    return raw[:, 0::2] + 1j * raw[:, 1::2]


def autocorrelation_estimate(phase: np.ndarray, lags: int) -> np.ndarray:
    """Time-average autocorrelation of e^{j*theta} along one phase path.

    Entry tau of the result (tau = 0..lags) is the sample average of
    e^{j*theta_i} * conj(e^{j*theta_{i+tau}}).  Lag 0 averages the unit
    modulus and is returned as exactly 1.  For a white phase path the
    nonzero lags pair independent samples and converge to |E e^{j*Theta}|^2,
    with no dependence on the lag itself.
    """
    phase = np.asarray(phase, dtype=np.float64)
    if phase.ndim != 1:
        raise ValueError(f"expected a 1-d phase sequence, got shape {phase.shape}")
    if not 0 <= lags < phase.size:
        raise ValueError(f"lags = {lags} requires a sequence of more than {lags} samples")
    z = np.exp(1j * phase)
    out = np.empty(lags + 1, dtype=np.complex128)
    out[0] = 1.0
    for tau in range(1, lags + 1):
        out[tau] = np.mean(z[: z.size - tau] * np.conj(z[tau:]))
    return out
