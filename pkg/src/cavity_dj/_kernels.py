"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin. Setting ``CAVITY_DJ_NO_NUMBA=1`` in the
environment (or not having numba installed) selects the numpy versions at
import time. Both sets stay importable as ``numba_impl`` / ``numpy_impl`` so
tests and the benchmark can compare them directly.

All kernels take a state tensor already reshaped to ``(left, d, right)``
where ``d`` is the dimension of the subsystem being acted on.
"""

import os
from types import SimpleNamespace

import numpy as np

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


def _numba_requested():
    flag = os.environ.get("CAVITY_DJ_NO_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


# --------------------------------------------------------------------------
# numpy path
# --------------------------------------------------------------------------


def _np_apply_local(op, psi):
    return np.matmul(op, psi)


def _np_fwht(a):
    m, r = a.shape
    out = a.copy()
    h = 1
    while h < m:
        blocks = out.reshape(m // (2 * h), 2, h, r)
        x = blocks[:, 0].copy()
        y = blocks[:, 1]
        blocks[:, 0] = (x + y) * _INV_SQRT2
        blocks[:, 1] = (x - y) * _INV_SQRT2
        h *= 2
    return out


def _np_marginal_probs(psi):
    return np.sum(psi.real**2 + psi.imag**2, axis=(0, 2))


def _np_reduced_density(psi):
    m = np.moveaxis(psi, 1, 0).reshape(psi.shape[1], -1)
    return m @ m.conj().T


def _np_phase_multiply(amps, phases):
    return amps * phases


numpy_impl = SimpleNamespace(
    name="numpy",
    apply_local=_np_apply_local,
    fwht=_np_fwht,
    marginal_probs=_np_marginal_probs,
    reduced_density=_np_reduced_density,
    phase_multiply=_np_phase_multiply,
)


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------


def _build_numba():
    from numba import njit

    @njit(cache=True)
    def apply_local(op, psi):
        left, d, right = psi.shape
        out = np.zeros_like(psi)
        for l in range(left):
            for i in range(d):
                for j in range(d):
                    a = op[i, j]
                    if a == 0:
                        continue
                    for r in range(right):
                        out[l, i, r] += a * psi[l, j, r]
        return out

    @njit(cache=True)
    def fwht(a):
        m, r = a.shape
        out = a.copy()
        s = 1.0 / np.sqrt(2.0)
        h = 1
        while h < m:
            for i in range(0, m, 2 * h):
                for j in range(i, i + h):
                    for k in range(r):
                        x = out[j, k]
                        y = out[j + h, k]
                        out[j, k] = (x + y) * s
                        out[j + h, k] = (x - y) * s
            h *= 2
        return out

    @njit(cache=True)
    def marginal_probs(psi):
        left, d, right = psi.shape
        p = np.zeros(d)
        for l in range(left):
            for i in range(d):
                for r in range(right):
                    z = psi[l, i, r]
                    p[i] += z.real * z.real + z.imag * z.imag
        return p

    @njit(cache=True)
    def reduced_density(psi):
        left, d, right = psi.shape
        rho = np.zeros((d, d), dtype=np.complex128)
        for l in range(left):
            for r in range(right):
                for i in range(d):
                    zi = psi[l, i, r]
                    if zi == 0:
                        continue
                    for j in range(d):
                        rho[i, j] += zi * np.conj(psi[l, j, r])
        return rho

    @njit(cache=True)
    def phase_multiply(amps, phases):
        out = np.empty_like(amps)
        for i in range(amps.shape[0]):
            out[i] = amps[i] * phases[i]
        return out

    return SimpleNamespace(
        name="numba",
        apply_local=apply_local,
        fwht=fwht,
        marginal_probs=marginal_probs,
        reduced_density=reduced_density,
        phase_multiply=phase_multiply,
    )


try:
    numba_impl = _build_numba()
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_impl = None

active = numba_impl if (numba_impl is not None and _numba_requested()) else numpy_impl
BACKEND = active.name


def apply_local(op, psi):
    """Return ``op`` applied along axis 1 of a ``(left, d, right)`` tensor."""
    return active.apply_local(np.ascontiguousarray(op, dtype=np.complex128),
                              np.ascontiguousarray(psi, dtype=np.complex128))


def fwht(a):
    """Normalized Walsh-Hadamard transform along axis 0 of a ``(2**n, r)`` array."""
    return active.fwht(np.ascontiguousarray(a, dtype=np.complex128))


def marginal_probs(psi):
    return active.marginal_probs(np.ascontiguousarray(psi, dtype=np.complex128))


def reduced_density(psi):
    return active.reduced_density(np.ascontiguousarray(psi, dtype=np.complex128))


def phase_multiply(amps, phases):
    return active.phase_multiply(np.ascontiguousarray(amps, dtype=np.complex128),
                                 np.ascontiguousarray(phases, dtype=np.complex128))
