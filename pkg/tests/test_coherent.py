"""Time-energy coherent states: closed forms against grid realizations."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiascat.coherent import (CoherentLabel, StateVector, braket,
                               coherent_state, free_shift,
                               identity_resolution_residual, label_spreads,
                               overlap, plane_wave_amplitude)
from adiascat.numerics import Grid, NumericalContractError

GRID = Grid(-48.0, 48.0, 1536)

labels = st.builds(
    CoherentLabel,
    st.floats(min_value=-4.0, max_value=4.0),
    st.floats(min_value=-2.5, max_value=2.5),
    st.floats(min_value=0.3, max_value=1.2),
)


@given(labels)
@settings(max_examples=60, deadline=None)
def test_norm_is_one(label):
    state = coherent_state(label, GRID)
    assert abs(state.norm() - 1.0) < 1e-10


@given(labels, labels)
@settings(max_examples=60, deadline=None)
def test_overlap_matches_grid_braket(a, b):
    b = CoherentLabel(b.t, b.e, a.eps)  # closed form wants equal widths
    measured = braket(coherent_state(a, GRID), coherent_state(b, GRID))
    assert abs(measured - overlap(a, b)) < 1e-12


def test_overlap_rejects_unequal_widths():
    with pytest.raises(ValueError):
        overlap(CoherentLabel(0.0, 0.0, 0.5), CoherentLabel(0.0, 0.0, 0.6))


@given(labels, st.floats(min_value=-2.0, max_value=2.0))
@settings(max_examples=40, deadline=None)
def test_free_shift_covariance(label, duration):
    # |t, e> evolves to a phase times |t - duration, e>
    tau = GRID.snap(duration)[1]
    state = coherent_state(label, GRID)
    shifted = free_shift(state, tau)
    predicted = coherent_state(CoherentLabel(label.t - tau, label.e,
                                             label.eps), GRID)
    phase = np.exp(-0.5j * tau * label.e)
    dist = math.sqrt(GRID.dx) * np.linalg.norm(
        shifted.amplitudes - phase * predicted.amplitudes)
    assert dist < 1e-10


def test_free_shift_off_lattice_uses_spectral_path():
    label = CoherentLabel(0.5, 1.0, 0.6)
    state = coherent_state(label, GRID)
    tau = 0.37 * GRID.dx
    shifted = free_shift(state, tau)
    predicted = coherent_state(CoherentLabel(label.t - tau, label.e,
                                             label.eps), GRID)
    phase = np.exp(-0.5j * tau * label.e)
    dist = math.sqrt(GRID.dx) * np.linalg.norm(
        shifted.amplitudes - phase * predicted.amplitudes)
    assert dist < 1e-10


def test_free_shift_wrap_guard():
    # fits the window, but the shift parks it on the periodic seam
    state = coherent_state(CoherentLabel(40.0, 0.0, 0.8), GRID)
    with pytest.raises(NumericalContractError):
        free_shift(state, -7.0)


def test_plane_wave_amplitude_closed_form():
    label = CoherentLabel(1.3, 0.8, 0.5)
    state = coherent_state(label, GRID)
    energies = np.array([0.8, 1.1, 0.2])
    amps = plane_wave_amplitude(state, energies)
    expected = (np.exp(-0.5j * label.t * label.e)
                * np.exp(1j * label.t * energies)
                * (math.pi * label.eps ** 2) ** -0.25
                * np.exp(-(energies - label.e) ** 2 / (2 * label.eps ** 2)))
    np.testing.assert_allclose(amps[0], expected, atol=1e-12)


def test_label_spreads_match_width():
    eps = 0.7
    state = coherent_state(CoherentLabel(0.5, 1.0, eps), GRID)
    de, dt = label_spreads(state)
    assert de == pytest.approx(eps / math.sqrt(2.0), rel=1e-6)
    assert dt == pytest.approx(1.0 / (eps * math.sqrt(2.0)), rel=1e-6)


def test_identity_resolution_residual_small():
    state = coherent_state(CoherentLabel(0.4, 0.9, 0.6), GRID)
    assert identity_resolution_residual(state, 0.6) < 1e-6


def test_identity_resolution_rejects_small_box():
    state = coherent_state(CoherentLabel(0.0, 0.0, 0.6), GRID)
    with pytest.raises(ValueError):
        identity_resolution_residual(state, 0.6, t_span=(-1.0, 1.0))


def test_coherent_state_representability_guards():
    with pytest.raises(ValueError):
        coherent_state(CoherentLabel(46.0, 0.0, 0.4), GRID)
    with pytest.raises(ValueError):
        # energy too close to the band edge
        coherent_state(CoherentLabel(0.0, 0.95 * GRID.p_max, 0.4), GRID)
    with pytest.raises(ValueError):
        coherent_state(CoherentLabel(0.0, 0.0, 0.5), GRID, channel=2,
                       n_channels=2)


def test_braket_conjugate_symmetry():
    a = coherent_state(CoherentLabel(0.3, 0.5, 0.5), GRID)
    b = coherent_state(CoherentLabel(-0.6, 1.1, 0.8), GRID)
    assert braket(a, b) == pytest.approx(np.conj(braket(b, a)))


def test_multichannel_states_are_orthogonal_across_channels():
    a = coherent_state(CoherentLabel(0.0, 1.0, 0.5), GRID, channel=0,
                       n_channels=2)
    b = coherent_state(CoherentLabel(0.0, 1.0, 0.5), GRID, channel=1,
                       n_channels=2)
    assert abs(braket(a, b)) < 1e-15
    assert abs(a.norm() - 1.0) < 1e-10


def test_state_vector_promotes_single_channel():
    amps = np.zeros(GRID.n, dtype=complex)
    state = StateVector(GRID, amps)
    assert state.amplitudes.shape == (1, GRID.n)
