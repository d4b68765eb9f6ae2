"""Atom and atom-field unitaries.

Level-to-index conventions:

* two-level atom: ``|e> -> 0``, ``|f> -> 1``
* three-level cascade atom: ``|f> -> 0``, ``|g> -> 1``, ``|e> -> 2`` (inert)
* Ramsey / preparation atom B: ``|f> -> 0``, ``|g> -> 1``

Joint atom-cavity operators are ordered atom (x) cavity, matching
:func:`cavity_dj.hilbert.apply_joint` with ``targets=(atom, cavity)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import TruncationError
from .hilbert import Operator, StateVector, apply_joint
from .optics import number_phases

TRUNCATION_LEAK_TOL = 1e-12


class TwoLevelAtom:
    E = 0
    F = 1
    dim = 2
    levels = {"e": E, "f": F}


class ThreeLevelAtom:
    F = 0
    G = 1
    E = 2
    dim = 3
    levels = {"f": F, "g": G, "e": E}
    qubit_levels = (F, G)


class RamseyAtom:
    F = 0
    G = 1
    dim = 2
    levels = {"f": F, "g": G}


@dataclass(frozen=True)
class InteractionParams:
    """Coupling ``g`` and detuning ``delta`` in rad/s, interaction time ``tau`` in s."""

    g: float
    delta: float
    tau: float

    @property
    def phi(self) -> float:
        return phi_for_tau(self.tau, self.g, self.delta)


def tau_for_phi(phi: float, g: float, delta: float) -> float:
    """Interaction time giving dispersive phase ``phi = g^2 tau / delta``."""
    if g == 0:
        raise ValueError("coupling g must be nonzero")
    if delta == 0:
        raise ValueError("detuning must be nonzero in the dispersive regime")
    return phi * delta / g**2


def phi_for_tau(tau: float, g: float, delta: float) -> float:
    if delta == 0:
        raise ValueError("detuning must be nonzero in the dispersive regime")
    return g**2 * tau / delta


@lru_cache(maxsize=64)
def jc_operator(g_tau: float, cavity_dim: int) -> Operator:
    """Resonant Jaynes-Cummings propagator on two-level atom (x) cavity.

    Each manifold ``{|e,n>, |f,n+1>}`` rotates by ``g tau sqrt(n+1)``. The
    top state ``|e, n_max>`` has no partner inside the cutoff and is left
    alone; :func:`jc_resonant` refuses states that populate it.
    """
    N = cavity_dim
    u = np.zeros((2 * N, 2 * N), dtype=np.complex128)
    u[N, N] = 1.0  # |f,0>
    u[N - 1, N - 1] = 1.0  # |e,n_max>
    for n in range(N - 1):
        e, f = n, N + n + 1
        theta = g_tau * np.sqrt(n + 1)
        c, s = np.cos(theta), np.sin(theta)
        u[e, e] = c
        u[f, f] = c
        u[f, e] = -1j * s
        u[e, f] = -1j * s
    return Operator(u)


def jc_resonant(state: StateVector, g_tau: float, atom: int, cavity: int) -> StateVector:
    if state.dims[atom] != 2:
        raise ValueError("resonant Jaynes-Cummings evolution needs a two-level atom")
    N = state.dims[cavity]
    t = np.moveaxis(state.tensor_view(), (atom, cavity), (0, 1))
    leak = float(np.sum(np.abs(t[TwoLevelAtom.E, N - 1]) ** 2))
    if leak > TRUNCATION_LEAK_TOL:
        raise TruncationError(
            f"population {leak:.3e} in |e, n={N - 1}> would couple above the Fock cutoff"
        )
    return apply_joint(jc_operator(g_tau, N), state, (atom, cavity))


@lru_cache(maxsize=64)
def u1_dispersive(phi: float, cavity_dim: int) -> Operator:
    """Two-level dispersive propagator.

    ``|e,n> -> exp(-i phi (n+1)) |e,n>`` and ``|f,n> -> exp(i phi n) |f,n>``.
    """
    n = np.arange(cavity_dim)
    diag = np.empty(2 * cavity_dim, dtype=np.complex128)
    diag[:cavity_dim] = np.exp(-1j * phi * (n + 1))
    diag[cavity_dim:] = number_phases(phi, cavity_dim)
    return Operator(np.diag(diag))


@lru_cache(maxsize=64)
def u2_dispersive(phi: float, cavity_dim: int, include_e: bool = True) -> Operator:
    """Effective f/g propagator ``exp(i phi a^dag a)|f><f| + |g><g|``.

    With ``include_e`` the atom factor is the three-level atom and ``|e>``
    passes through untouched; without it the atom is the two-level
    preparation atom B.
    """
    levels = 3 if include_e else 2
    diag = np.ones(levels * cavity_dim, dtype=np.complex128)
    diag[:cavity_dim] = number_phases(phi, cavity_dim)  # f is index 0 in both layouts
    return Operator(np.diag(diag))


_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


def hadamard() -> Operator:
    return Operator(_H)


def ramsey_r1(c_f: complex, c_g: complex) -> Operator:
    """Rotation on (|f>, |g>) sending ``|g>`` to ``c_f|f> + c_g|g>``."""
    c_f, c_g = complex(c_f), complex(c_g)
    norm2 = abs(c_f) ** 2 + abs(c_g) ** 2
    if abs(norm2 - 1.0) > 1e-10:
        raise ValueError(f"Ramsey coefficients must satisfy |c_f|^2 + |c_g|^2 = 1, got {norm2!r}")
    return Operator(np.array([[np.conj(c_g), c_f], [-np.conj(c_f), c_g]]))


def ramsey_r2() -> Operator:
    return Operator(np.array([[1, -1j], [-1j, 1]]) / np.sqrt(2))


def embed_qubit_op(op: Operator) -> Operator:
    """Lift a 2x2 gate on (|f>, |g>) to the three-level atom, identity on |e>."""
    m = np.eye(3, dtype=np.complex128)
    m[:2, :2] = op.entries
    return Operator(m, op.unitary_flag)
