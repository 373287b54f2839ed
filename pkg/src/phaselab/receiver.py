"""Projection receivers: basis projections and the baud-rate matched filter.

All receivers are Riemann inner products against basis functions.  Within a
symbol slot the trigonometric basis is a discrete Fourier family, so the
whole bank of projections for one slot is a DFT of the slot's samples; the
matched filter Y_{0m} is the n = 0 bin.  The batched kernels exploit this,
and the single-waveform operations define the reference semantics they are
tested against.
"""

from __future__ import annotations

import numpy as np

from phaselab.grid import (
    BasisIndex,
    RectangularPulse,
    TimeGrid,
    Waveform,
    eval_basis,
    inner_product,
)
from phaselab.stochastics import PhaseModel, RandomStream, as_generator, sample_phase

__all__ = [
    "basis_projection",
    "matched_filter_bank",
    "projection_bank",
    "lemma_projection",
    "lemma_projection_given_phase",
    "slot_phase_projection",
]


def basis_projection(y: Waveform, idx: BasisIndex) -> complex:
    """Projection Y_{nm} = <y, phi_{nm}> of a received waveform."""
    return inner_product(y, eval_basis(idx, y.grid))


def matched_filter_bank(y: Waveform, pulse: RectangularPulse | None = None) -> np.ndarray:
    """Baud-rate matched-filter outputs Y_{0m} = <y, g_m>, one per slot,
    in slot order."""
    return matched_filter_matrix(y.samples[np.newaxis, :], y.grid, pulse)[0]


def matched_filter_matrix(
    y: np.ndarray,
    grid: TimeGrid,
    pulse: RectangularPulse | None = None,
) -> np.ndarray:
    """Batched matched filter: rows of received samples to rows of Y_{0m}.

    Generic over any single-slot pulse: correlates each slot's samples with
    the conjugate pulse and applies the Riemann weight delta.
    """
    if pulse is None:
        pulse = RectangularPulse(grid.T)
    slots = grid.slots.size
    p = grid.samples_per_slot
    weights = np.conj(pulse.slot_samples(grid))
    return (y.reshape(y.shape[0], slots, p) @ weights) * grid.delta


def projection_bank(y: np.ndarray, grid: TimeGrid, n_max: int) -> np.ndarray:
    """Projections Y_{nm} for n = 0..n_max and every slot m, batched.

    Input rows are received waveforms; output has shape
    (rows, n_max + 1, slots).  Per slot the bank is the leading n_max + 1
    bins of the within-slot DFT scaled by delta/sqrt(T):

        Y_{nm} = delta * sum_r y[m, r] * exp(-2j*pi*n*r/p) / sqrt(T)
    """
    p = grid.samples_per_slot
    if not 0 <= n_max < p:
        raise ValueError(f"n_max = {n_max} must lie in 0..{p - 1} at this refinement")
    slots = grid.slots.size
    spectra = np.fft.fft(y.reshape(y.shape[0], slots, p), axis=2)[:, :, : n_max + 1]
    return spectra.transpose(0, 2, 1) * (grid.delta / np.sqrt(grid.T))


def slot_phase_projection(phase: np.ndarray, n: int, grid: TimeGrid) -> np.ndarray:
    """Kernel of the convergence experiments, batched over phase rows.

    For phase samples theta_r on one slot (last axis, length p) this
    returns the projection of the phase-rotated pulse onto phi_n of the
    same slot:

        (delta / T) * sum_r exp(j*theta_r) * exp(-2j*pi*n*r/p)

    whose mean over white phase is mu for n = 0 and exactly 0 for
    0 < n < p, at every refinement level.
    """
    p = grid.samples_per_slot
    if phase.shape[-1] != p:
        raise ValueError(f"phase rows have {phase.shape[-1]} samples, slot holds {p}")
    if not 0 <= n < p:
        raise ValueError(f"frequency index n = {n} must lie in 0..{p - 1}")
    twiddle = np.exp(-2j * np.pi * n * np.arange(p) / p)
    return (np.exp(1j * phase) @ twiddle) * (grid.delta / grid.T)


def lemma_projection_given_phase(
    k: int,
    idx: BasisIndex,
    grid: TimeGrid,
    phase: np.ndarray,
) -> complex:
    """Projection <g_k * e^{j*theta}, phi_{nm}> for one full-grid phase path.

    The pulse g_k and the basis function phi_{nm} occupy single slots, so
    the projection vanishes identically when k != m (disjoint supports)
    and otherwise reduces to the slot kernel.
    """
    phase = np.asarray(phase, dtype=np.float64)
    if phase.shape != (grid.size,):
        raise ValueError(f"phase path has shape {phase.shape}, grid expects ({grid.size},)")
    if not grid.contains_slot(k):
        raise ValueError(f"pulse slot {k} lies outside the window")
    lo, hi = grid.slot_bounds(idx.m)
    if k != idx.m:
        return 0j
    return complex(slot_phase_projection(phase[lo:hi], idx.n, grid))


def lemma_projection(
    k: int,
    idx: BasisIndex,
    model: PhaseModel,
    grid: TimeGrid,
    rng: RandomStream | np.random.Generator,
) -> complex:
    """Draw one white-phase path on the grid and project g_k * e^{j*theta}
    onto phi_{nm}.  Refining the grid drives this to mu for (n, m) = (0, k)
    and to 0 for every other index pair."""
    gen = as_generator(rng)
    phase = sample_phase(model, grid.size, gen)
    return lemma_projection_given_phase(k, idx, grid, phase)
