"""Time-stepping kernels for the cascaded polarization/field system.

Two implementations of the same RK4 loop: a numba-compiled scalar loop and a
vectorised numpy fallback. ``GPECHO_DISABLE_NUMBA=1`` (or a missing numba)
selects the fallback. Both take the medium flattened across all targets:

    position  (n,)    z_n + x per node
    offset    (n,)    constant detuning offset per node (Doppler shift)
    weights   (n-1,)  eta * dx / 2 between neighbours, 0 across target gaps
    cos_half  (2m+1,) cos(theta) at every half step
    drive_half(2m+1,) input field at every half step

and return ``(records, history, fail_step, fail_node)``.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("GPECHO_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLE


def field_profile(rho, drive, weights):
    """Field at every node: drive + i * cumulative trapezoid of weights * rho."""
    out = np.empty(rho.shape[0], dtype=np.complex128)
    out[0] = drive
    out[1:] = drive + 1j * np.cumsum(weights * (rho[:-1] + rho[1:]))
    return out


def rhs_numpy(rho, drive, c, position, offset, weights, decay, K):
    field = field_profile(rho, drive, weights)
    rate = decay + 1j * (offset - K * position * c)
    return -rate * rho + 0.5j * field, field


def rk4_step_numpy(rho, dt, c0, c_mid, c1, d0, d_mid, d1, position, offset, weights, decay, K):
    k1, field = rhs_numpy(rho, d0, c0, position, offset, weights, decay, K)
    k2, _ = rhs_numpy(rho + 0.5 * dt * k1, d_mid, c_mid, position, offset, weights, decay, K)
    k3, _ = rhs_numpy(rho + 0.5 * dt * k2, d_mid, c_mid, position, offset, weights, decay, K)
    k4, _ = rhs_numpy(rho + dt * k3, d1, c1, position, offset, weights, decay, K)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), field


def rk4_cascade_numpy(rho0, position, offset, weights, decay, K, cos_half, drive_half,
                      dt, boundary_nodes, keep_history):
    n_steps = (cos_half.shape[0] - 1) // 2
    rho = rho0.astype(np.complex128).copy()
    records = np.zeros((n_steps + 1, boundary_nodes.shape[0]), dtype=np.complex128)
    history = np.zeros((n_steps + 1 if keep_history else 0, rho.shape[0]), dtype=np.complex128)
    for i in range(n_steps):
        j = 2 * i
        if keep_history:
            history[i] = rho
        new, field = rk4_step_numpy(rho, dt, cos_half[j], cos_half[j + 1], cos_half[j + 2],
                                    drive_half[j], drive_half[j + 1], drive_half[j + 2],
                                    position, offset, weights, decay, K)
        records[i] = field[boundary_nodes]
        bad = ~np.isfinite(new)
        if bad.any():
            return records, history, i + 1, int(np.argmax(bad))
        rho = new
    field = field_profile(rho, drive_half[2 * n_steps], weights)
    records[n_steps] = field[boundary_nodes]
    if keep_history:
        history[n_steps] = rho
    return records, history, -1, -1


def _rk4_cascade_loop(rho0, position, offset, weights, decay, K, cos_half, drive_half,
                      dt, boundary_nodes, keep_history):
    n_steps = (cos_half.shape[0] - 1) // 2
    n = rho0.shape[0]
    rho = rho0.astype(np.complex128).copy()
    records = np.zeros((n_steps + 1, boundary_nodes.shape[0]), dtype=np.complex128)
    history = np.zeros((n_steps + 1 if keep_history else 0, n), dtype=np.complex128)
    field = np.empty(n, dtype=np.complex128)
    stage = np.empty(n, dtype=np.complex128)
    ks = np.empty((4, n), dtype=np.complex128)
    for i in range(n_steps):
        j = 2 * i
        if keep_history:
            history[i] = rho
        for s in range(4):
            if s == 0:
                c, d = cos_half[j], drive_half[j]
                for q in range(n):
                    stage[q] = rho[q]
            elif s == 3:
                c, d = cos_half[j + 2], drive_half[j + 2]
                for q in range(n):
                    stage[q] = rho[q] + dt * ks[2, q]
            else:
                c, d = cos_half[j + 1], drive_half[j + 1]
                for q in range(n):
                    stage[q] = rho[q] + 0.5 * dt * ks[s - 1, q]
            acc = 0j
            field[0] = d
            for q in range(n - 1):
                acc += weights[q] * (stage[q] + stage[q + 1])
                field[q + 1] = d + 1j * acc
            if s == 0:
                for b in range(boundary_nodes.shape[0]):
                    records[i, b] = field[boundary_nodes[b]]
            for q in range(n):
                rate = decay + 1j * (offset[q] - K * position[q] * c)
                ks[s, q] = -rate * stage[q] + 0.5j * field[q]
        for q in range(n):
            v = rho[q] + (dt / 6.0) * (ks[0, q] + 2.0 * ks[1, q] + 2.0 * ks[2, q] + ks[3, q])
            if not (np.isfinite(v.real) and np.isfinite(v.imag)):
                return records, history, i + 1, q
            rho[q] = v
    d = drive_half[2 * n_steps]
    acc = 0j
    field[0] = d
    for q in range(n - 1):
        acc += weights[q] * (rho[q] + rho[q + 1])
        field[q + 1] = d + 1j * acc
    for b in range(boundary_nodes.shape[0]):
        records[n_steps, b] = field[boundary_nodes[b]]
    if keep_history:
        history[n_steps] = rho
    return records, history, -1, -1


if HAVE_NUMBA:
    rk4_cascade_numba = numba.njit(cache=True)(_rk4_cascade_loop)
else:  # pragma: no cover
    rk4_cascade_numba = None


def rk4_cascade(*args, backend: str | None = None):
    """Dispatch to the selected backend ('numba' or 'numpy')."""
    if backend is None:
        backend = "numba" if USE_NUMBA else "numpy"
    if backend == "numba":
        if rk4_cascade_numba is None:
            raise RuntimeError("numba backend requested but numba is not installed")
        return rk4_cascade_numba(*args)
    if backend == "numpy":
        return rk4_cascade_numpy(*args)
    raise ValueError(f"unknown backend {backend!r}")


def default_backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
