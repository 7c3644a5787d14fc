"""Time-energy coherent states on chiral channels.

A label (t, e) with width eps describes a minimal wave packet whose
momentum amplitude is

    psi_hat(p) = exp(-i t e / 2) exp(i t p) g_eps(p - e),
    g_eps(p) = (pi eps^2)^{-1/4} exp(-p^2 / (2 eps^2)).

With unit rightward velocity the packet is centered at position -t, so
t is the arrival time at the origin and e the mean energy.  Inner
products conjugate the first argument, so scalar factors on the ket
pull out of brackets unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import Grid, NumericalContractError

_TWO_PI = 2.0 * math.pi


@dataclass
class StateVector:
    """Channel-resolved amplitudes on a periodic grid; rows are channels."""

    grid: Grid
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim == 1:
            amps = amps[None, :]
        if amps.ndim != 2 or amps.shape[1] != self.grid.n:
            raise ValueError("amplitudes must be (channels, grid.n)")
        self.amplitudes = amps

    @property
    def channels(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return math.sqrt(self.grid.dx * float(np.sum(np.abs(self.amplitudes) ** 2)))

    def copy(self) -> "StateVector":
        return StateVector(self.grid, self.amplitudes.copy())

    def momentum_amplitudes(self) -> np.ndarray:
        return self.grid.to_momentum(self.amplitudes)


def braket(bra: StateVector, ket: StateVector) -> complex:
    """Physics inner product on the grid; conjugates the bra."""
    if bra.grid != ket.grid:
        raise ValueError("states live on different grids")
    if bra.channels != ket.channels:
        raise ValueError("states have different channel counts")
    return complex(np.vdot(bra.amplitudes, ket.amplitudes) * bra.grid.dx)


@dataclass(frozen=True)
class CoherentLabel:
    """Time-energy label with packet width eps."""

    t: float
    e: float
    eps: float

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")

    @property
    def position_center(self) -> float:
        return -self.t

    @property
    def position_spread(self) -> float:
        return 1.0 / (math.sqrt(2.0) * self.eps)

    @property
    def energy_spread(self) -> float:
        return self.eps / math.sqrt(2.0)


def _momentum_profile(label: CoherentLabel, p: np.ndarray) -> np.ndarray:
    g = (math.pi * label.eps ** 2) ** (-0.25) * np.exp(
        -((p - label.e) ** 2) / (2.0 * label.eps ** 2))
    return np.exp(-0.5j * label.t * label.e) * np.exp(1j * label.t * p) * g


def coherent_state(label: CoherentLabel, grid: Grid,
                   channel: int = 0, n_channels: int = 1,
                   sigma_margin: float = 6.0) -> StateVector:
    """Grid realization of the labelled packet on one channel.

    Rejects labels whose packet would not fit the position window or the
    momentum band with the requested number of spreads to spare.
    """
    if not 0 <= channel < n_channels:
        raise ValueError("channel index out of range")
    x_c = label.position_center
    sx = sigma_margin * label.position_spread
    if x_c - sx < grid.x_min or x_c + sx > grid.x_max:
        raise ValueError(
            f"packet at x={x_c:.3g} +- {sx:.3g} does not fit window "
            f"[{grid.x_min:.3g}, {grid.x_max:.3g}]")
    sp = sigma_margin * label.energy_spread
    if abs(label.e) + sp > 0.9 * grid.p_max:
        raise ValueError(
            f"energy {label.e:.3g} +- {sp:.3g} too close to the momentum "
            f"band edge {grid.p_max:.3g}")
    phat = _momentum_profile(label, grid.momenta)
    amps = np.zeros((n_channels, grid.n), dtype=np.complex128)
    amps[channel] = grid.from_momentum(phat)
    return StateVector(grid, amps)


def overlap(a: CoherentLabel, b: CoherentLabel) -> complex:
    """Closed-form inner product of two equal-width labels, bra first."""
    if a.eps != b.eps:
        raise ValueError("overlap requires equal widths")
    eps = a.eps
    mag = math.exp(-((a.e - b.e) ** 2) / (4.0 * eps ** 2)
                   - (eps ** 2) * ((a.t - b.t) ** 2) / 4.0)
    phase = 0.5 * (a.e * b.t - b.e * a.t)
    return mag * complex(math.cos(phase), math.sin(phase))


def free_shift(state: StateVector, duration: float,
               wrap_tol: float = 1e-10) -> StateVector:
    """Free chiral evolution by the given duration: translation by +duration.

    Lattice-aligned durations are exact index rolls; anything else goes
    through the momentum representation.  Rejects shifts that push
    weight across the periodic seam.
    """
    grid = state.grid
    m, snapped = grid.snap(duration)
    if abs(snapped - duration) < 1e-12 * max(1.0, abs(duration)):
        out = np.roll(state.amplitudes, m, axis=-1)
    else:
        phat = grid.to_momentum(state.amplitudes)
        out = grid.from_momentum(phat * np.exp(-1j * grid.momenta * duration))
    shifted = StateVector(grid, out)
    edge = grid.edge_mass(out)
    if edge > wrap_tol:
        raise NumericalContractError(
            f"free shift by {duration:.3g} leaves {edge:.2e} relative weight "
            "at the window edge (wrap hazard)")
    return shifted


def label_spreads(state: StateVector) -> tuple[float, float]:
    """Measured (energy spread, time spread) from grid moments.

    Time spread is the position spread read at unit velocity.
    """
    grid = state.grid
    dens_x = np.sum(np.abs(state.amplitudes) ** 2, axis=0)
    wx = grid.quadrature(dens_x)
    x = grid.points
    mean_x = grid.quadrature(dens_x * x) / wx
    var_x = grid.quadrature(dens_x * (x - mean_x) ** 2) / wx
    phat = state.momentum_amplitudes()
    dens_p = np.sum(np.abs(phat) ** 2, axis=0)
    dp = _TWO_PI / (grid.n * grid.dx)
    wp = dp * np.sum(dens_p)
    p = grid.momenta
    mean_p = dp * np.sum(dens_p * p) / wp
    var_p = dp * np.sum(dens_p * (p - mean_p) ** 2) / wp
    return math.sqrt(var_p), math.sqrt(var_x)


def plane_wave_amplitude(state: StateVector, energies) -> np.ndarray:
    """Amplitudes (E| state on each channel for the given energy values.

    For a coherent label this tends to
    exp(-i t e / 2) exp(i t E) g_eps(E - e) as the grid refines.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    waves = np.exp(-1j * np.outer(energies, state.grid.points))
    out = (state.grid.dx / math.sqrt(_TWO_PI)) * (waves @ state.amplitudes.T)
    return out.T


def label_box(state: StateVector, eps: float,
              spreads: float = 6.0) -> tuple[tuple[float, float], tuple[float, float]]:
    """Label-plane box that captures the state against width-eps packets."""
    de, dt = label_spreads(state)
    grid = state.grid
    dens_x = np.sum(np.abs(state.amplitudes) ** 2, axis=0)
    mean_x = grid.quadrature(dens_x * grid.points) / grid.quadrature(dens_x)
    phat = state.momentum_amplitudes()
    dens_p = np.sum(np.abs(phat) ** 2, axis=0)
    mean_p = float(np.sum(dens_p * grid.momenta) / np.sum(dens_p))
    pad_t = spreads * (dt + 1.0 / (math.sqrt(2.0) * eps))
    pad_e = spreads * (de + eps / math.sqrt(2.0))
    return ((-mean_x - pad_t, -mean_x + pad_t), (mean_p - pad_e, mean_p + pad_e))


def identity_resolution_residual(state: StateVector, eps: float,
                                 t_span: tuple[float, float] | None = None,
                                 e_span: tuple[float, float] | None = None,
                                 nt: int = 64, ne: int = 64) -> float:
    """Relative defect of the label-plane resolution of identity.

    Reconstructs the state from its coherent amplitudes over a finite
    label box with measure dt de / (2 pi) and returns the relative L2
    error.  Rejects boxes that cannot capture the state, quoting an
    adequate box in the error.
    """
    required_t, required_e = label_box(state, eps)
    if t_span is None:
        t_span = required_t
    if e_span is None:
        e_span = required_e
    if t_span[0] > required_t[0] or t_span[1] < required_t[1] \
            or e_span[0] > required_e[0] or e_span[1] < required_e[1]:
        raise ValueError(
            f"label box too small; need t in [{required_t[0]:.3g}, "
            f"{required_t[1]:.3g}] and e in [{required_e[0]:.3g}, "
            f"{required_e[1]:.3g}]")
    grid = state.grid
    p = grid.momenta
    dp = _TWO_PI / (grid.n * grid.dx)
    ts = np.linspace(t_span[0], t_span[1], nt)
    es = np.linspace(e_span[0], e_span[1], ne)
    wt = np.full(nt, ts[1] - ts[0])
    wt[0] *= 0.5
    wt[-1] *= 0.5
    we = np.full(ne, es[1] - es[0])
    we[0] *= 0.5
    we[-1] *= 0.5
    waves = np.exp(-1j * np.outer(ts, p))
    norm_g = (math.pi * eps ** 2) ** (-0.25)
    total_err = 0.0
    total_ref = 0.0
    phat_all = state.momentum_amplitudes()
    for ch in range(state.channels):
        phat = phat_all[ch]
        rec = np.zeros_like(phat)
        for i in range(ne):
            g = norm_g * np.exp(-((p - es[i]) ** 2) / (2.0 * eps ** 2))
            coeff = waves @ (g * phat * dp)
            rec += (we[i] / _TWO_PI) * g * ((wt * coeff) @ np.conj(waves))
        total_err += float(np.sum(np.abs(rec - phat) ** 2) * dp)
        total_ref += float(np.sum(np.abs(phat) ** 2) * dp)
    return math.sqrt(total_err / total_ref)
