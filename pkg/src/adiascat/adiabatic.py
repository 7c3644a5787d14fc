"""First-order adiabatic scattering diagnostics.

Ties together the pieces: coherent labels probe the dynamical
scattering operator, the frozen on-shell matrix provides the
approximation, and the routines here measure the gap and the
first-order structures that predict it:

* remainder between dynamical and frozen scattering on matched labels,
* the first-order response coefficient tau (a label-time-weighted
  integral of frozen wave-operator elements of the drive derivative),
* a windowed Duhamel (Born) correction operator,
* the dynamical energy shift operator and its frozen on-shell twin,
* a dense functional-calculus identity check for outgoing states.

Conventions: on matched labels (t = s/omega) the leading remainder is
-i omega tau + O(omega^2).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .coherent import CoherentLabel, StateVector, braket, coherent_state
from .numerics import Grid, central_derivative
from .network import (ScatterModel, MatrixPotential, apply_h0,
                      apply_coupling_sderivative, clearance_T, dynamical_S,
                      dynamical_S_adjoint, frozen, frozen_S_apply,
                      frozen_energy_shift_onshell, on_shell_S, propagate,
                      wave_operator, wigner_delay)
from .soluble import (SolubleModel, dynamical_S_profile,
                      dynamical_energy_shift_profile)
from . import network as _network

logger = logging.getLogger(__name__)


@dataclass
class GridOperator:
    """A grid-realized operator: a state map with a short description."""

    apply: Callable[[StateVector], StateVector]
    label: str = ""
    unitary: bool = False


@dataclass
class ErrorReport:
    value_exact: complex
    value_approx: complex
    predicted_bound: float | None = None
    params: dict = dataclass_field(default_factory=dict)

    @property
    def abs_error(self) -> float:
        return abs(self.value_exact - self.value_approx)


def coherent_element(op, grid: Grid, bra: CoherentLabel, ket: CoherentLabel,
                     n_channels: int = 1, bra_channel: int = 0,
                     ket_channel: int = 0) -> complex:
    """Matrix element of an operator between two coherent labels."""
    apply = op.apply if isinstance(op, GridOperator) else op
    bra_state = coherent_state(bra, grid, channel=bra_channel,
                               n_channels=n_channels)
    ket_state = coherent_state(ket, grid, channel=ket_channel,
                               n_channels=n_channels)
    return braket(bra_state, apply(ket_state))


def _matched_states(model: ScatterModel, s: float, e: float, eps: float,
                    j: int, jp: int, grid: Grid):
    label = CoherentLabel(s / model.omega, e, eps)
    bra = coherent_state(label, grid, channel=j, n_channels=model.n_channels)
    ket = coherent_state(label, grid, channel=jp, n_channels=model.n_channels)
    return label, bra, ket


def remainder_exact(model: ScatterModel, s: float, e: float, eps: float,
                    j: int = 0, jp: int = 0, grid: Grid | None = None,
                    T: float | None = None, substeps: int = 1) -> complex:
    """Element of S_dynamical(0) - S_frozen(s) on matched labels t = s/omega.

    Both operators are realized with the same asymptotic window so the
    difference isolates the drive, not the windowing.
    """
    if grid is None:
        raise ValueError("remainder_exact needs a grid")
    _, bra, ket = _matched_states(model, s, e, eps, j, jp, grid)
    if T is None:
        T = clearance_T(model, ket)
    out_dyn = dynamical_S(model, 0.0, ket, T=T, substeps=substeps)
    out_froz = frozen_S_apply(model, s, ket, T=T, substeps=substeps)
    return braket(bra, out_dyn) - braket(bra, out_froz)


def adiabatic_tau(model: ScatterModel, s: float, e: float, eps: float,
                  j: int = 0, jp: int = 0, grid: Grid | None = None,
                  substeps: int = 1, half_width: float | None = None,
                  n_nodes: int = 49) -> complex:
    """First-order response coefficient.

    tau = - integral dt' t' <t',e,j| W_+^* (dH/ds) W_- |t',e,jp>
    with W_+- the wave operators of the model frozen at s.  On matched
    labels the dynamical-minus-frozen remainder is -i omega tau to
    leading order in omega.
    """
    if grid is None:
        raise ValueError("adiabatic_tau needs a grid")
    fmodel = frozen(model, s)
    sigma_x = 1.0 / (math.sqrt(2.0) * eps)
    radius = model.interaction_radius()
    if half_width is None:
        half_width = 8.0 / eps
    reach = radius + sigma_x * math.sqrt(2.0 * math.log(1e14))
    nodes = np.linspace(-half_width, half_width, n_nodes)
    weights = np.full(n_nodes, nodes[1] - nodes[0])
    weights[0] *= 0.5
    weights[-1] *= 0.5
    total = 0.0 + 0.0j
    for tp, wgt in zip(nodes, weights):
        if abs(tp) > reach:
            continue
        label = CoherentLabel(tp, e, eps)
        ket = coherent_state(label, grid, channel=jp,
                             n_channels=model.n_channels)
        bra = coherent_state(label, grid, channel=j,
                             n_channels=model.n_channels)
        T = clearance_T(fmodel, ket)
        w_minus = wave_operator(fmodel, s, -1, ket, T=T, substeps=substeps)
        w_plus = wave_operator(fmodel, s, +1, bra, T=T, substeps=substeps)
        drive = apply_coupling_sderivative(model, s, w_minus)
        total += wgt * tp * braket(w_plus, drive)
    return -total


def born_correction(model: ScatterModel, s: float,
                    linearized: bool = False, T: float | None = None,
                    substeps: int = 1) -> GridOperator:
    """Windowed Duhamel correction against the frozen flow at s.

    Realizes -i integral over the window of U_s(0,u) dH(u) U_s(u,0)
    where U_s is the flow of the model frozen at s and dH(u) is the
    drive offset f(s + omega u) - f(s) times the coupling (or the
    linearization omega u fdot(s) when ``linearized``).  Adding the
    identity gives a first-order surrogate for the dynamical operator
    taken relative to the frozen reference; sandwiching the linearized
    version between frozen wave operators recovers the tau integrand.
    """
    fmodel = frozen(model, s)

    def apply(state: StateVector) -> StateVector:
        grid = state.grid
        T_use = clearance_T(model, state) if T is None else grid.snap(T)[1]
        steps, _ = grid.snap(2.0 * T_use)
        delta = grid.dx
        fdot = float(model.schedule.derivative(s))
        f_s = float(model.schedule.value(s))
        step = _network.frozen_one_step(fmodel, grid, substeps=substeps)
        drive = _network.coupling_field_apply(model, grid)
        t_c = s / model.omega

        def offset(u: float) -> float:
            if linearized:
                return model.omega * u * fdot
            return float(model.schedule.value(s + model.omega * u)) - f_s

        phi = propagate(fmodel, state, t_c, t_c - T_use,
                        substeps=substeps).amplitudes
        beta = np.zeros_like(phi)
        u = -T_use
        g_prev = offset(u) * drive(phi)
        for _ in range(steps):
            beta = step(beta + 0.5 * delta * g_prev)
            phi = step(phi)
            u += delta
            g_prev = offset(u) * drive(phi)
            beta = beta + 0.5 * delta * g_prev
        tail = propagate(fmodel, StateVector(grid, beta), t_c + T_use, t_c,
                         substeps=substeps, norm_tol=math.inf)
        return StateVector(grid, -1j * tail.amplitudes)

    kind = "linearized" if linearized else "full"
    return GridOperator(apply, label=f"born-correction[{kind}] at s={s:.3g}")


def smeared_frozen_element(model: ScatterModel, s: float, e: float, eps: float,
                           j: int = 0, jp: int = 0, n_nodes: int = 160,
                           steps: int | None = None) -> complex:
    """Gaussian energy smearing of the frozen on-shell amplitude.

    (pi eps^2)^{-1/2} integral of S_{j,jp}(s, E) exp(-(E-e)^2/eps^2) dE
    over a window wide enough for the weight to saturate.
    """
    if isinstance(model.coupling, MatrixPotential):
        # energy independent by construction; the weight integrates to one
        return complex(on_shell_S(model, s, e, steps=steps).matrix[j, jp])
    gl_x, gl_w = leggauss(n_nodes)
    half = 10.0 * eps
    energies = e + half * gl_x
    scalars = _network.rankone_scalar_amplitude(model.coupling, s, energies)
    u = model.coupling.vector
    proj = np.outer(u, np.conj(u))[j, jp]
    values = (1.0 if j == jp else 0.0) + (scalars - 1.0) * proj
    weight = np.exp(-((energies - e) ** 2) / eps ** 2) / (
        math.sqrt(math.pi) * eps)
    return complex(np.sum(values * weight * gl_w) * half)


def onshell_vs_frozen(model: ScatterModel, s: float, e: float, eps: float,
                      j: int = 0, jp: int = 0,
                      n_nodes: int = 160) -> ErrorReport:
    """Smeared frozen amplitude against its on-shell value at the center.

    The predicted bound is eps^2 (|tau_w|^2 + |dtau_w/dE|) from the
    Wigner delay matrix and its energy derivative.
    """
    exact = smeared_frozen_element(model, s, e, eps, j, jp, n_nodes=n_nodes)
    approx = complex(on_shell_S(model, s, e).matrix[j, jp])
    tw = wigner_delay(model, s, e)

    def tw_fun(en: float) -> np.ndarray:
        return wigner_delay(model, s, en).matrix

    dtw = central_derivative(tw_fun, e, 1e-2)
    bound = eps ** 2 * (np.linalg.norm(tw.matrix, 2) ** 2
                        + np.linalg.norm(dtw, 2))
    return ErrorReport(exact, approx, float(bound),
                       params=dict(s=s, e=e, eps=eps, j=j, jp=jp))


def combined_report(model: ScatterModel, s: float, e: float, eps: float,
                    j: int = 0, jp: int = 0, grid: Grid | None = None,
                    T: float | None = None, substeps: int = 1,
                    tau_value: complex | None = None) -> ErrorReport:
    """Dynamical element against the frozen on-shell value, with bound.

    The bound combines the smearing term eps^2 (|tau_w|^2 + |tau_w'|)
    and the drive term omega |tau|.  Pass tau_value to reuse a
    precomputed response coefficient across a sweep.
    """
    if grid is None:
        raise ValueError("combined_report needs a grid")
    _, bra, ket = _matched_states(model, s, e, eps, j, jp, grid)
    if T is None:
        T = clearance_T(model, ket)
    exact = braket(bra, dynamical_S(model, 0.0, ket, T=T, substeps=substeps))
    approx = complex(on_shell_S(model, s, e).matrix[j, jp])
    tw = wigner_delay(model, s, e)

    def tw_fun(en: float) -> np.ndarray:
        return wigner_delay(model, s, en).matrix

    dtw = central_derivative(tw_fun, e, 1e-2)
    if tau_value is None:
        tau_value = adiabatic_tau(model, s, e, eps, j, jp, grid=grid,
                                  substeps=substeps)
    bound = (eps ** 2 * (np.linalg.norm(tw.matrix, 2) ** 2
                         + np.linalg.norm(dtw, 2))
             + model.omega * abs(tau_value))
    return ErrorReport(exact, approx, float(bound),
                       params=dict(omega=model.omega, s=s, e=e, eps=eps,
                                   j=j, jp=jp))


def energy_shift_operator(model: ScatterModel, s: float,
                          T: float | None = None,
                          substeps: int = 1) -> GridOperator:
    """Dynamical energy shift (H_0 - S_d H_0 S_d^*) / omega at base point s."""

    def apply(state: StateVector) -> StateVector:
        T_use = clearance_T(model, state) if T is None else T
        adj = dynamical_S_adjoint(model, s, state, T=T_use, substeps=substeps)
        h0adj = apply_h0(adj)
        back = dynamical_S(model, s, h0adj, T=T_use, substeps=substeps)
        out = (apply_h0(state).amplitudes - back.amplitudes) / model.omega
        return StateVector(state.grid, out)

    return GridOperator(apply, label=f"energy-shift at s={s:.3g}")


def thawed_energy_shift_report(model: ScatterModel, s: float, e: float,
                               eps: float, j: int = 0, jp: int = 0,
                               grid: Grid | None = None,
                               T: float | None = None,
                               substeps: int = 1) -> ErrorReport:
    """Dynamical energy shift element against the frozen on-shell one.

    The dynamical operator sits at base point 0 and is probed at the
    matched label t = s/omega; the frozen comparison is i dS/ds S^* of
    the on-shell family at s.  Agreement is first order in omega.
    """
    if grid is None:
        raise ValueError("thawed_energy_shift_report needs a grid")
    _, bra, ket = _matched_states(model, s, e, eps, j, jp, grid)
    if T is None:
        T = clearance_T(model, ket)
    op = energy_shift_operator(model, 0.0, T=T, substeps=substeps)
    exact = braket(bra, op.apply(ket))
    approx = complex(frozen_energy_shift_onshell(model, s, e).matrix[j, jp])
    return ErrorReport(exact, approx,
                       params=dict(omega=model.omega, s=s, e=e, eps=eps,
                                   j=j, jp=jp))


# ---------------------------------------------------------------------------
# Dense functional-calculus check
# ---------------------------------------------------------------------------

def rho_fermi(mu: float = 0.0, width: float = 0.2,
              floor: float | None = None) -> Callable:
    """Smoothed occupation step, unit filling far below mu.

    On a periodic momentum lattice the density must settle before the
    band seam at +-pi/dx; pass a floor energy (well below any physical
    scale) to open the occupation softly at the band bottom too.
    """
    def rho(energies: np.ndarray) -> np.ndarray:
        occ = 1.0 / (1.0 + np.exp((energies - mu) / width))
        if floor is not None:
            occ = occ / (1.0 + np.exp(-(energies - floor) / width))
        return occ
    return rho


def rho_gaussian(center: float = 0.0, width: float = 1.0) -> Callable:
    def rho(energies: np.ndarray) -> np.ndarray:
        return np.exp(-((energies - center) / width) ** 2)
    return rho


def rho_polynomial(coeffs: tuple = (0.0, 1.0)) -> Callable:
    """Polynomial density, coefficients in ascending order."""
    def rho(energies: np.ndarray) -> np.ndarray:
        return np.polynomial.polynomial.polyval(energies, np.asarray(coeffs))
    return rho


def _dense_fourier(grid: Grid) -> np.ndarray:
    p = grid.momenta
    x = grid.points
    return np.exp(-1j * np.outer(p, x)) / math.sqrt(grid.n)


def _as_soluble(model) -> SolubleModel:
    if isinstance(model, SolubleModel):
        return model
    if isinstance(model, ScatterModel) \
            and isinstance(model.coupling, MatrixPotential) \
            and model.n_channels == 1 and len(model.coupling.matrices) == 1:
        scale = float(model.coupling.matrices[0][0, 0].real)
        mix = model.coupling.profiles[0]
        scaled = type(mix)(tuple(scale * a for a in mix.amps),
                           mix.centers, mix.widths)
        return SolubleModel(scaled, model.coupling.schedule, model.omega)
    raise NotImplementedError(
        "dense functional calculus needs a single-channel local model "
        "with closed-form profiles")


def outgoing_state_check(model, s: float, rho: Callable[[np.ndarray], np.ndarray],
                         grid: Grid) -> float:
    """Operator-norm defect of rho-transport through dynamical scattering.

    Checks S_d rho(H_0) S_d^* = rho(H_0 - omega E_d) with closed-form
    scattering and energy-shift profiles, dense on a small grid (n <=
    1024).  Schedules with unequal asymptotic values leave a seam jump
    on the periodic grid, which this check will honestly report.
    """
    soluble = _as_soluble(model)
    if grid.n > 1024:
        raise ValueError("dense check limited to grids with n <= 1024")
    lo, hi = soluble.schedule.asymptotics()
    if abs(hi - lo) > 1e-12 * max(1.0, abs(hi), abs(lo)):
        logger.warning("schedule asymptotics differ (%.3g vs %.3g); "
                       "expect a seam-limited residual", lo, hi)
    fmat = _dense_fourier(grid)
    h0 = np.conj(fmat.T) @ (grid.momenta[:, None] * fmat)
    h0 = 0.5 * (h0 + np.conj(h0.T))
    s_diag = dynamical_S_profile(soluble, s, grid)
    shift_diag = dynamical_energy_shift_profile(soluble, s, grid)

    w, v = np.linalg.eigh(h0)
    rho_h0 = (v * rho(w)) @ np.conj(v.T)
    lhs = (s_diag[:, None] * rho_h0) * np.conj(s_diag)[None, :]

    shifted = h0 - soluble.omega * np.diag(shift_diag)
    shifted = 0.5 * (shifted + np.conj(shifted.T))
    w2, v2 = np.linalg.eigh(shifted)
    rhs = (v2 * rho(w2)) @ np.conj(v2.T)
    return float(np.linalg.norm(lhs - rhs, 2))
