"""Composite-space state vectors, dense operators and measurements.

Basis ordering is lexicographic over subsystem indices with subsystem 0 the
most significant digit, so for atoms followed by a cavity the flat index is
``((a0 * d1 + a1) * ... ) * n_fock + n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DimensionError, NumericInvariantError

TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CompositeSpace:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise DimensionError("composite space needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise DimensionError(f"every subsystem dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def concat(self, other: CompositeSpace) -> CompositeSpace:
        return CompositeSpace(self.dims + other.dims)

    def split(self, target: int) -> tuple[int, int, int]:
        """Return ``(left, d, right)`` sizes around subsystem ``target``."""
        self._check_index(target)
        return prod(self.dims[:target]), self.dims[target], prod(self.dims[target + 1:])

    def _check_index(self, k):
        if not 0 <= k < len(self.dims):
            raise IndexError(f"subsystem index {k} out of range for {len(self.dims)} subsystems")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on a :class:`CompositeSpace`.

    Construction checks the norm against ``TOL``; use :meth:`normalized` to
    build from an arbitrary nonzero vector.
    """

    space: CompositeSpace
    amps: np.ndarray

    def __post_init__(self):
        if not isinstance(self.space, CompositeSpace):
            object.__setattr__(self, "space", CompositeSpace(tuple(self.space)))
        amps = _frozen(np.ravel(self.amps))
        if amps.shape[0] != self.space.total_dim:
            raise DimensionError(
                f"{amps.shape[0]} amplitudes for a space of dimension {self.space.total_dim}"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > TOL:
            raise NumericInvariantError(f"state norm^2 = {norm2!r} deviates from 1 by more than {TOL}")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def normalized(cls, dims: Sequence[int], amps) -> StateVector:
        amps = np.asarray(amps, dtype=np.complex128).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise NumericInvariantError("cannot normalize the zero vector")
        return cls(CompositeSpace(tuple(dims)), amps / norm)

    @classmethod
    def basis(cls, dims: Sequence[int], labels: Sequence[int]) -> StateVector:
        """Computational basis state ``|labels[0], labels[1], ...>``."""
        space = CompositeSpace(tuple(dims))
        if len(labels) != space.n_subsystems:
            raise DimensionError("one label per subsystem is required")
        amps = np.zeros(space.total_dim, dtype=np.complex128)
        amps[np.ravel_multi_index(tuple(labels), space.dims)] = 1.0
        return cls(space, amps)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.space.dims

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def tensor_view(self) -> np.ndarray:
        return self.amps.reshape(self.space.dims)

    def __repr__(self):
        return f"StateVector(dims={self.dims}, amps={np.array2string(self.amps, precision=4)})"


@dataclass(frozen=True, eq=False)
class Operator:
    entries: np.ndarray
    unitary_flag: bool = True

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)
        if self.unitary_flag:
            err = unitarity_error(m)
            if err > TOL:
                raise NumericInvariantError(f"operator flagged unitary but |U^dag U - I|_max = {err:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other: Operator) -> Operator:
        return Operator(self.entries @ other.entries, self.unitary_flag and other.unitary_flag)

    def dagger(self) -> Operator:
        return Operator(self.entries.conj().T, self.unitary_flag)

    def is_diagonal(self, atol: float = 0.0) -> bool:
        off = self.entries - np.diag(np.diag(self.entries))
        return bool(np.max(np.abs(off), initial=0.0) <= atol)


def unitarity_error(m) -> float:
    """Max-norm deviation of ``m^dag m`` from the identity."""
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def identity(dim: int) -> Operator:
    return Operator(np.eye(dim))


@dataclass(frozen=True)
class MeasurementOutcome:
    subsystem_index: int
    basis_label: int
    probability: float
    post_state: StateVector


def _checked(space, amps, tol=TOL):
    norm2 = float(np.vdot(amps, amps).real)
    if abs(norm2 - 1.0) > tol:
        raise NumericInvariantError(f"evolution broke normalization: norm^2 = {norm2!r}")
    return StateVector(space, amps)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(a.space.concat(b.space), np.kron(a.amps, b.amps))


def tensor_all(states: Sequence[StateVector]) -> StateVector:
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def apply_on(op: Operator, state: StateVector, target: int) -> StateVector:
    """Apply a single-subsystem operator, identity on every other factor."""
    left, d, right = state.space.split(target)
    if op.dim != d:
        raise DimensionError(f"subsystem dimension mismatch: operator {op.dim}, subsystem {d}")
    psi = state.amps.reshape(left, d, right)
    out = _kernels.apply_local(op.entries, psi)
    return _checked(state.space, out.ravel())


def apply_joint(op: Operator, state: StateVector, targets: tuple[int, int]) -> StateVector:
    """Apply a two-subsystem operator on ``targets`` (in that factor order)."""
    a, b = targets
    dims = state.space.dims
    state.space._check_index(a)
    state.space._check_index(b)
    if a == b:
        raise DimensionError("repeated target index")
    if op.dim != dims[a] * dims[b]:
        raise DimensionError(
            f"subsystem dimension mismatch: operator {op.dim}, subsystems {dims[a]}x{dims[b]}"
        )
    t = np.moveaxis(state.tensor_view(), (a, b), (0, 1))
    moved_shape = t.shape
    psi = t.reshape(1, op.dim, -1)
    out = _kernels.apply_local(op.entries, psi).reshape(moved_shape)
    out = np.moveaxis(out, (0, 1), (a, b))
    return _checked(state.space, out.ravel())


def apply_diagonal(phases, state: StateVector) -> StateVector:
    """Multiply amplitudes elementwise by a full-space diagonal."""
    phases = np.asarray(phases, dtype=np.complex128).ravel()
    if phases.shape[0] != state.space.total_dim:
        raise DimensionError("diagonal length does not match the state dimension")
    return _checked(state.space, _kernels.phase_multiply(state.amps, phases))


def inner(a: StateVector, b: StateVector) -> complex:
    if a.dims != b.dims:
        raise DimensionError(f"space mismatch: {a.dims} vs {b.dims}")
    return complex(np.vdot(a.amps, b.amps))


def fidelity_up_to_phase(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|``, which is 1 exactly when the states differ by a global phase."""
    return min(1.0, abs(inner(a, b)))


def reduced_density_matrix(state: StateVector, subsystem: int) -> np.ndarray:
    left, d, right = state.space.split(subsystem)
    return _kernels.reduced_density(state.amps.reshape(left, d, right))


def reduced_purity(state: StateVector, subsystem: int) -> float:
    """Tr(rho^2) of the reduced state on one subsystem."""
    rho = reduced_density_matrix(state, subsystem)
    return float(np.real(np.sum(rho * rho.T)))


def marginal_probabilities(state: StateVector, subsystem: int) -> np.ndarray:
    left, d, right = state.space.split(subsystem)
    return _kernels.marginal_probs(state.amps.reshape(left, d, right))


def leading_probabilities(state: StateVector, n_leading: int) -> np.ndarray:
    """Joint Born distribution of the first ``n_leading`` subsystems, flat index."""
    lead = prod(state.dims[:n_leading])
    if n_leading == state.space.n_subsystems:
        return np.abs(state.amps) ** 2
    psi = state.amps.reshape(1, lead, -1)
    return _kernels.marginal_probs(psi)


def derive_seed(seed: int, index: int) -> int:
    """64-bit seed for stream ``index`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def sample_index(probs, u: float) -> int:
    """Inverse-CDF draw for one uniform ``u`` in [0, 1)."""
    cdf = np.cumsum(probs)
    k = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(k, len(probs) - 1)


def measure_subsystem(state: StateVector, subsystem: int, rng_seed: int) -> MeasurementOutcome:
    """Projective computational-basis measurement of one subsystem.

    The outcome is drawn from the marginal Born distribution with a generator
    seeded by ``rng_seed`` alone, so equal seeds give identical outcomes.
    """
    probs = marginal_probabilities(state, subsystem)
    u = np.random.default_rng(rng_seed).random()
    label = sample_index(probs, u)
    left, d, right = state.space.split(subsystem)
    psi = state.amps.reshape(left, d, right).copy()
    mask = np.zeros(d, dtype=bool)
    mask[label] = True
    psi[:, ~mask, :] = 0.0
    post = psi.ravel()
    post = post / np.linalg.norm(post)
    return MeasurementOutcome(subsystem, label, float(probs[label]), StateVector(state.space, post))


def _rank_one_factor(m: np.ndarray, dims) -> StateVector:
    # rows index the complement; the heaviest row fixes the returned phase
    row = m[np.argmax(np.sum(np.abs(m) ** 2, axis=1))]
    return StateVector.normalized(dims, row)


def factor_out(state: StateVector, subsystem: int, tol: float = TOL) -> StateVector:
    """Return the factor on ``subsystem`` of a product state.

    The global phase is fixed by the largest-norm slice of the complement, so
    ``|x> (x) c|chi>`` comes back as ``c|chi>`` when ``|x>`` is a basis state.
    Raises :class:`NumericInvariantError` if the state is entangled across the cut.
    """
    purity = reduced_purity(state, subsystem)
    if abs(purity - 1.0) > tol:
        raise NumericInvariantError(f"state is not a product across subsystem {subsystem} (purity {purity:.12f})")
    left, d, right = state.space.split(subsystem)
    m = np.moveaxis(state.amps.reshape(left, d, right), 1, 2).reshape(-1, d)
    return _rank_one_factor(m, (d,))


def factor_leading(state: StateVector, n_leading: int, tol: float = TOL) -> StateVector:
    """Factor on the first ``n_leading`` subsystems of a product state."""
    dims = state.dims[:n_leading]
    if n_leading == len(state.dims):
        return state
    m = state.amps.reshape(prod(dims), -1)
    # purity of the complement equals purity of the leading block
    small = m.conj().T @ m
    purity = float(np.real(np.sum(small * small.T)))
    if abs(purity - 1.0) > tol:
        raise NumericInvariantError(f"leading block is entangled with the rest (purity {purity:.12f})")
    return _rank_one_factor(m.T, dims)
