"""Single-mode field states on a truncated Fock basis."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import poisson

from .errors import TruncationError
from .hilbert import Operator, StateVector

DEFAULT_TAIL_EPSILON = 1e-12
DEFAULT_ALPHA = 2.0


@dataclass(frozen=True)
class FockTruncation:
    """Basis ``|0> ... |n_max>`` plus the admissible discarded probability."""

    n_max: int
    tail_epsilon: float = DEFAULT_TAIL_EPSILON

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if not self.tail_epsilon > 0:
            raise ValueError("tail_epsilon must be positive")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class CoherentSpec:
    alpha: complex
    truncation: FockTruncation


@dataclass(frozen=True)
class CatState:
    parity: str
    alpha: complex
    truncation: FockTruncation

    def __post_init__(self):
        if self.parity not in ("+", "-"):
            raise ValueError(f"parity must be '+' or '-', got {self.parity!r}")

    @property
    def normalization(self) -> float:
        """Untruncated N+- = 2 (1 +- exp(-2|alpha|^2))."""
        sign = 1.0 if self.parity == "+" else -1.0
        return 2.0 * (1.0 + sign * np.exp(-2.0 * abs(self.alpha) ** 2))


def poisson_tail(alpha: complex, n_max: int) -> float:
    """Probability mass of a coherent state above photon number ``n_max``."""
    mean = abs(alpha) ** 2
    if mean == 0:
        return 0.0
    return float(poisson.sf(n_max, mean))


def choose_truncation(alpha: complex, tail_epsilon: float = DEFAULT_TAIL_EPSILON) -> FockTruncation:
    """Smallest cutoff whose discarded Poisson mass is at most ``tail_epsilon``."""
    if not 0 < tail_epsilon < 1:
        raise ValueError("tail_epsilon must lie in (0, 1)")
    n_max = 1
    while poisson_tail(alpha, n_max) > tail_epsilon:
        n_max += 1
    return FockTruncation(n_max, tail_epsilon)


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Raw ``exp(-|a|^2/2) a^n / sqrt(n!)`` for n < dim, not renormalized."""
    c = np.empty(dim, dtype=np.complex128)
    c[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    return c


def coherent_overlap(alpha: complex, beta: complex) -> complex:
    """Exact ``<alpha|beta>`` in the untruncated space."""
    return complex(np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * abs(beta) ** 2 + np.conj(alpha) * beta))


def _check_tail(alpha, truncation):
    tail = poisson_tail(alpha, truncation.n_max)
    if tail > truncation.tail_epsilon:
        raise TruncationError(
            f"insufficient Fock truncation: n_max={truncation.n_max} discards {tail:.3e} "
            f"> {truncation.tail_epsilon:.1e} for |alpha|={abs(alpha):.4g}"
        )


def coherent_state(spec: CoherentSpec) -> StateVector:
    _check_tail(spec.alpha, spec.truncation)
    return StateVector.normalized((spec.truncation.dim,), coherent_amplitudes(spec.alpha, spec.truncation.dim))


def cat_state(cat: CatState) -> StateVector:
    """Even (+) or odd (-) superposition of ``|alpha>`` and ``|-alpha>``.

    Built from ``c_n(alpha) (1 +- (-1)^n)`` so the parity support is exact,
    then renormalized on the truncated space.
    """
    _check_tail(cat.alpha, cat.truncation)
    c = coherent_amplitudes(cat.alpha, cat.truncation.dim)
    n = np.arange(cat.truncation.dim)
    keep = (n % 2 == 0) if cat.parity == "+" else (n % 2 == 1)
    amps = np.where(keep, 2.0 * c, 0.0)
    return StateVector.normalized((cat.truncation.dim,), amps)


def fock_state(n: int, dim: int) -> StateVector:
    return StateVector.basis((dim,), (n,))


def number_phases(phi: float, dim: int) -> np.ndarray:
    return np.exp(1j * phi * np.arange(dim))


@lru_cache(maxsize=128)
def number_phase_op(phi: float, dim: int) -> Operator:
    """Diagonal ``exp(i phi a^dag a)`` on ``dim`` Fock levels."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    return Operator(np.diag(number_phases(phi, dim)))


def mean_photon_number(state: StateVector) -> float:
    if len(state.dims) != 1:
        raise ValueError("expected a single-mode field state")
    p = np.abs(state.amps) ** 2
    return float(np.dot(np.arange(len(p)), p))


def photon_parity_support(state: StateVector) -> tuple[float, float]:
    """Largest |amplitude| on even and on odd photon numbers."""
    a = np.abs(state.amps)
    return float(a[0::2].max(initial=0.0)), float(a[1::2].max(initial=0.0))
