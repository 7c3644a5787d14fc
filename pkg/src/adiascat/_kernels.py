"""Hot transport kernels, in jitted and pure-numpy flavours.

Every public function here has two implementations with identical
signatures and semantics: a numba ``@njit`` version and a vectorized
numpy version.  Selection happens once at import time.  Setting the
environment variable ``ADIASCAT_NO_NUMBA=1`` forces the numpy path;
a missing numba install falls back to it silently.

Kernels are deliberately dumb: they take flat arrays and scalars,
return arrays, and never touch package dataclasses.  Callers own the
snapping of durations to the grid lattice and the application of the
returned factors to state amplitudes.
"""

from __future__ import annotations

import math
import os

import numpy as np

NUMBA_DISABLED = os.environ.get("ADIASCAT_NO_NUMBA", "") == "1"

HAS_NUMBA = False
if not NUMBA_DISABLED:
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:  # pragma: no cover - exercised only without numba
        pass

# Schedule kind ids shared with profiles.Schedule.
KIND_CONSTANT = 0
KIND_TANH = 1
KIND_BUMP = 2
KIND_SMOOTHSTEP = 3


def _schedule_value(kind, a, b, c, d, s):
    if kind == KIND_CONSTANT:
        return a
    z = (s - b) / c
    if kind == KIND_TANH:
        return a * math.tanh(z) + d
    if kind == KIND_BUMP:
        return a * math.exp(-z * z) + d
    # smoothstep (logistic)
    if z >= 0.0:
        sig = 1.0 / (1.0 + math.exp(-z))
    else:
        ez = math.exp(z)
        sig = ez / (1.0 + ez)
    return a * sig + d


def _schedule_value_vec(kind, a, b, c, d, s):
    """Vectorized twin of _schedule_value for ndarray s."""
    if kind == KIND_CONSTANT:
        return np.full_like(np.asarray(s, dtype=float), a)
    z = (np.asarray(s, dtype=float) - b) / c
    if kind == KIND_TANH:
        return a * np.tanh(z) + d
    if kind == KIND_BUMP:
        return a * np.exp(-z * z) + d
    sig = np.empty_like(z)
    pos = z >= 0.0
    sig[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    sig[~pos] = ez / (1.0 + ez)
    return a * sig + d


def _mix_value(amps, centers, widths, x):
    acc = 0.0
    for g in range(amps.shape[0]):
        z = (x - centers[g]) / widths[g]
        acc += amps[g] * math.exp(-z * z)
    return acc


def _mix_value_vec(amps, centers, widths, x):
    acc = np.zeros_like(x)
    for g in range(amps.shape[0]):
        z = (x - centers[g]) / widths[g]
        acc += amps[g] * np.exp(-z * z)
    return acc


def _active_range(c0, dt, rmax, nsteps):
    """Index range of substeps whose characteristic point lies in |u| <= rmax.

    u_k = c0 + k*dt; returns (klo, khi) inclusive, possibly empty (khi < klo).
    """
    if dt > 0.0:
        lo = (-rmax - c0) / dt
        hi = (rmax - c0) / dt
    else:
        lo = (rmax - c0) / dt
        hi = (-rmax - c0) / dt
    klo = int(math.ceil(lo))
    khi = int(math.floor(hi))
    if klo < 0:
        klo = 0
    if khi > nsteps - 1:
        khi = nsteps - 1
    return klo, khi


# ---------------------------------------------------------------------------
# Single-channel characteristic phase
# ---------------------------------------------------------------------------

def _char_phase_py(x, tau, t1, nsteps, amps, centers, widths,
                   kind, p0, p1, p2, p3, omega, rmax):
    n = x.shape[0]
    dt = tau / nsteps
    t0 = t1 - tau
    out = np.zeros(n)
    for j in range(n):
        c0 = x[j] - tau + 0.5 * dt
        klo, khi = _active_range(c0, dt, rmax, nsteps)
        acc = 0.0
        for k in range(klo, khi + 1):
            u = c0 + k * dt
            tk = t0 + (k + 0.5) * dt
            f = _schedule_value(kind, p0, p1, p2, p3, omega * tk)
            acc += f * _mix_value(amps, centers, widths, u)
        out[j] = acc * dt
    return out


def _char_phase_numpy(x, tau, t1, nsteps, amps, centers, widths,
                      kind, p0, p1, p2, p3, omega, rmax):
    n = x.shape[0]
    dt = tau / nsteps
    t0 = t1 - tau
    out = np.zeros(n)
    for j in range(n):
        c0 = x[j] - tau + 0.5 * dt
        klo, khi = _active_range(c0, dt, rmax, nsteps)
        if khi < klo:
            continue
        ks = np.arange(klo, khi + 1)
        u = c0 + ks * dt
        tk = t0 + (ks + 0.5) * dt
        f = _schedule_value_vec(kind, p0, p1, p2, p3, omega * tk)
        out[j] = dt * np.dot(f, _mix_value_vec(amps, centers, widths, u))
    return out


# ---------------------------------------------------------------------------
# Multi-channel characteristic unitaries
# ---------------------------------------------------------------------------

def _char_unitary_py(x, tau, t1, nsteps, mats, centers, widths,
                     kind, p0, p1, p2, p3, omega, rmax):
    n = x.shape[0]
    nc = mats.shape[1]
    ngauss = mats.shape[0]
    dt = tau / nsteps
    t0 = t1 - tau
    out = np.zeros((n, nc, nc), dtype=np.complex128)
    eye = np.eye(nc, dtype=np.complex128)
    for j in range(n):
        c0 = x[j] - tau + 0.5 * dt
        klo, khi = _active_range(c0, dt, rmax, nsteps)
        U = eye.copy()
        if nc == 2:
            u00 = U[0, 0]
            u01 = U[0, 1]
            u10 = U[1, 0]
            u11 = U[1, 1]
            for k in range(klo, khi + 1):
                u = c0 + k * dt
                tk = t0 + (k + 0.5) * dt
                f = _schedule_value(kind, p0, p1, p2, p3, omega * tk)
                scale = f * dt
                h00 = 0.0 + 0.0j
                h01 = 0.0 + 0.0j
                h11 = 0.0 + 0.0j
                for g in range(ngauss):
                    z = (u - centers[g]) / widths[g]
                    w = math.exp(-z * z) * scale
                    h00 += mats[g, 0, 0] * w
                    h01 += mats[g, 0, 1] * w
                    h11 += mats[g, 1, 1] * w
                # exp(-iH) for Hermitian 2x2 H, closed form
                alpha = 0.5 * (h00.real + h11.real)
                delta = 0.5 * (h00.real - h11.real)
                theta = math.sqrt(delta * delta + (h01.real * h01.real
                                                   + h01.imag * h01.imag))
                ca = math.cos(alpha)
                sa = math.sin(alpha)
                ph = complex(ca, -sa)
                ct = math.cos(theta)
                if theta < 1e-30:
                    snc = 1.0
                else:
                    snc = math.sin(theta) / theta
                f00 = ph * complex(ct, -snc * delta)
                f01 = ph * (-1j) * snc * h01
                f10 = ph * (-1j) * snc * h01.conjugate()
                f11 = ph * complex(ct, snc * delta)
                n00 = f00 * u00 + f01 * u10
                n01 = f00 * u01 + f01 * u11
                n10 = f10 * u00 + f11 * u10
                n11 = f10 * u01 + f11 * u11
                u00, u01, u10, u11 = n00, n01, n10, n11
            out[j, 0, 0] = u00
            out[j, 0, 1] = u01
            out[j, 1, 0] = u10
            out[j, 1, 1] = u11
        else:
            H = np.zeros((nc, nc), dtype=np.complex128)
            for k in range(klo, khi + 1):
                u = c0 + k * dt
                tk = t0 + (k + 0.5) * dt
                f = _schedule_value(kind, p0, p1, p2, p3, omega * tk)
                scale = f * dt
                for a in range(nc):
                    for b in range(nc):
                        H[a, b] = 0.0
                for g in range(ngauss):
                    z = (u - centers[g]) / widths[g]
                    w = math.exp(-z * z) * scale
                    for a in range(nc):
                        for b in range(nc):
                            H[a, b] += mats[g, a, b] * w
                evals, evecs = np.linalg.eigh(H)
                F = (evecs * np.exp(-1j * evals)) @ np.conj(evecs.T)
                U = F @ U
            out[j] = U
    return out


def _char_unitary_numpy(x, tau, t1, nsteps, mats, centers, widths,
                        kind, p0, p1, p2, p3, omega, rmax):
    n = x.shape[0]
    nc = mats.shape[1]
    dt = tau / nsteps
    t0 = t1 - tau
    dx = x[1] - x[0] if n > 1 else 1.0
    x0 = x[0]
    out = np.broadcast_to(np.eye(nc, dtype=np.complex128), (n, nc, nc)).copy()
    for k in range(nsteps):
        off = -tau + (k + 0.5) * dt
        # active j: |x_j + off| <= rmax
        jlo = int(math.ceil((-rmax - off - x0) / dx))
        jhi = int(math.floor((rmax - off - x0) / dx))
        jlo = max(jlo, 0)
        jhi = min(jhi, n - 1)
        if jhi < jlo:
            continue
        u = x[jlo:jhi + 1] + off
        tk = t0 + (k + 0.5) * dt
        f = _schedule_value(kind, p0, p1, p2, p3, omega * tk)
        scale = f * dt
        weights = np.exp(-((u[:, None] - centers[None, :])
                           / widths[None, :]) ** 2) * scale
        H = np.tensordot(weights, mats, axes=(1, 0))
        evals, evecs = np.linalg.eigh(H)
        phase = np.exp(-1j * evals)
        F = np.einsum("jab,jb,jcb->jac", evecs, phase, np.conj(evecs))
        out[jlo:jhi + 1] = F @ out[jlo:jhi + 1]
    return out


# ---------------------------------------------------------------------------
# Ordered product of sampled Hermitian generators
# ---------------------------------------------------------------------------

def _unitary_product_py(ks, dt):
    steps = ks.shape[0]
    m = ks.shape[1]
    U = np.eye(m, dtype=np.complex128)
    for k in range(steps):
        evals, evecs = np.linalg.eigh(ks[k] * dt)
        F = (evecs * np.exp(-1j * evals)) @ np.conj(evecs.T)
        U = F @ U
    return U


def _unitary_product_numpy(ks, dt):
    steps = ks.shape[0]
    m = ks.shape[1]
    if steps == 0:
        return np.eye(m, dtype=np.complex128)
    evals, evecs = np.linalg.eigh(ks * dt)
    phase = np.exp(-1j * evals)
    fs = np.einsum("kab,kb,kcb->kac", evecs, phase, np.conj(evecs))
    # pairwise tree reduction; later factors stay on the left
    while fs.shape[0] > 1:
        if fs.shape[0] % 2 == 1:
            pad = np.broadcast_to(np.eye(m, dtype=np.complex128), (1, m, m))
            fs = np.concatenate([fs, pad])
        fs = fs[1::2] @ fs[0::2]
    return fs[0]


characteristic_phase_numpy = _char_phase_numpy
characteristic_unitary_numpy = _char_unitary_numpy
unitary_product_numpy = _unitary_product_numpy

if HAS_NUMBA:
    _schedule_value = njit(cache=True)(_schedule_value)
    _mix_value = njit(cache=True)(_mix_value)
    _active_range = njit(cache=True)(_active_range)
    characteristic_phase_numba = njit(cache=True)(_char_phase_py)
    characteristic_unitary_numba = njit(cache=True)(_char_unitary_py)
    unitary_product_numba = njit(cache=True)(_unitary_product_py)
    characteristic_phase = characteristic_phase_numba
    characteristic_unitary = characteristic_unitary_numba
    unitary_product = unitary_product_numba
else:
    characteristic_phase_numba = None
    characteristic_unitary_numba = None
    unitary_product_numba = None
    characteristic_phase = characteristic_phase_numpy
    characteristic_unitary = characteristic_unitary_numpy
    unitary_product = unitary_product_numpy


def backend_name() -> str:
    return "numba" if HAS_NUMBA else "numpy"
