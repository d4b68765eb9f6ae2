"""Deutsch and Deutsch-Jozsa runs on the cavity-QED hardware model.

Three execution modes share one pipeline (prepare, oracle, ``H`` on every
atom, read the register):

``ideal_gate``
    Circuit model: register qubits plus one ancilla qubit in ``|1>``, the
    XOR oracle ``|X, y> -> |X, y ^ F(X)>``. The ancilla plays the cavity's role
    in the report.
``two_level_fock``
    Two-level atoms ``(|e>+|f>)/sqrt2`` crossing a cavity prepared in
    ``(|0>-|1>)/sqrt2`` by a resonant pulse, each atom interacting through the
    dispersive ``U1``.
``three_level_coherent``
    Cascade atoms ``(|f>+|g>)/sqrt2`` crossing a cavity holding the odd cat
    state, interacting through ``U2``.

Register bit order: atom A1 is the most significant bit of ``X``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import pi
from typing import Callable

import numpy as np

from . import _kernels
from .dynamics import (
    RamseyAtom,
    embed_qubit_op,
    hadamard,
    jc_resonant,
    ramsey_r1,
    ramsey_r2,
    u1_dispersive,
    u2_dispersive,
)
from .errors import DimensionError, NumericInvariantError, OracleClassError
from .hilbert import (
    TOL,
    StateVector,
    apply_joint,
    apply_on,
    derive_seed,
    factor_leading,
    factor_out,
    fidelity_up_to_phase,
    leading_probabilities,
    marginal_probabilities,
    measure_subsystem,
    reduced_density_matrix,
    reduced_purity,
    sample_index,
    tensor,
    tensor_all,
)
from .optics import (
    DEFAULT_ALPHA,
    DEFAULT_TAIL_EPSILON,
    CatState,
    CoherentSpec,
    FockTruncation,
    cat_state,
    choose_truncation,
    coherent_state,
)

PHI_BALANCED = pi
PHI_CONSTANT = 2 * pi
DECISION_THRESHOLD = 0.5

_SQRT_HALF = 1 / np.sqrt(2)


# --------------------------------------------------------------------------
# oracles
# --------------------------------------------------------------------------


def _popcount(x: int) -> int:
    return bin(x).count("1")


def bitwise_dot(x: str, y: str) -> int:
    """Mod-2 inner product of two equal-length bit strings."""
    if len(x) != len(y):
        raise ValueError(f"bit strings differ in length: {len(x)} vs {len(y)}")
    if set(x + y) - {"0", "1"}:
        raise ValueError("bit strings may only contain '0' and '1'")
    return _popcount(int(x, 2) & int(y, 2)) & 1 if x else 0


@dataclass(frozen=True)
class OracleSpec:
    """Truth table of ``F: {0,1}^n -> {0,1}``; entry ``X`` is ``F(X)``.

    Only constant and balanced tables are accepted.
    """

    n: int
    truth_table: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("oracle needs at least one input bit")
        table = tuple(int(b) for b in self.truth_table)
        if len(table) != 2**self.n:
            raise ValueError(f"truth table has {len(table)} entries, expected {2 ** self.n}")
        if any(b not in (0, 1) for b in table):
            raise ValueError("truth table entries must be 0 or 1")
        ones = sum(table)
        if ones not in (0, len(table) // 2, len(table)):
            raise OracleClassError(ones, len(table))
        object.__setattr__(self, "truth_table", table)

    @property
    def ones_count(self) -> int:
        return sum(self.truth_table)

    @property
    def kind(self) -> str:
        return "balanced" if self.ones_count == len(self.truth_table) // 2 else "constant"

    @property
    def table_string(self) -> str:
        return "".join(str(b) for b in self.truth_table)

    def __call__(self, x: int) -> int:
        return self.truth_table[x]

    def phases(self) -> np.ndarray:
        return 1.0 - 2.0 * np.asarray(self.truth_table, dtype=float)

    def summary(self) -> dict:
        return {"n": self.n, "truth_table": self.table_string, "class": self.kind}

    @classmethod
    def from_function(cls, n: int, fn: Callable[[int], int]) -> OracleSpec:
        return cls(n, tuple(int(fn(x)) & 1 for x in range(2**n)))

    @classmethod
    def from_string(cls, n: int, bits: str) -> OracleSpec:
        return cls(n, tuple(int(c) for c in bits))

    @classmethod
    def constant(cls, n: int, value: int = 0) -> OracleSpec:
        return cls(n, (value,) * 2**n)

    @classmethod
    def parity(cls, n: int) -> OracleSpec:
        return cls.from_function(n, _popcount)

    @classmethod
    def random_balanced(cls, n: int, seed: int) -> OracleSpec:
        rng = np.random.default_rng(seed)
        table = np.zeros(2**n, dtype=int)
        table[rng.permutation(2**n)[: 2 ** (n - 1)]] = 1
        return cls(n, tuple(table.tolist()))


@dataclass(frozen=True)
class Unrealizable:
    """The uniform dispersive schedule cannot imprint this oracle's phases."""

    reason: str


def physical_phi_for(oracle: OracleSpec) -> float | Unrealizable:
    """Dispersive phase that makes the atom-by-atom schedule act as ``oracle``.

    Every atom receives the same phase. ``phi = 2pi`` leaves all atoms alone;
    ``phi = pi`` gives each atom ``-|0> + |1>``, i.e. the register phase
    ``(-1)^(n - |X|)``. An oracle is realizable when its phase pattern matches
    one of these up to a global sign.
    """
    signs = oracle.phases()
    x = np.arange(2**oracle.n)
    imprint_pi = np.array([(-1.0) ** (oracle.n - _popcount(int(v))) for v in x])
    if np.all(signs == signs[0]):
        return PHI_CONSTANT
    if np.all(signs == imprint_pi) or np.all(signs == -imprint_pi):
        return PHI_BALANCED
    return Unrealizable(
        f"balanced table {oracle.table_string} is not a (complemented) parity function; "
        "a uniform dispersive phase cannot imprint it"
    )


def ideal_oracle_apply(state: StateVector, oracle: OracleSpec) -> StateVector:
    """Phase oracle ``|X> -> (-1)^F(X) |X>`` on the leading ``n`` qubits.

    Trailing subsystems, if any, are spectators.
    """
    n = oracle.n
    if len(state.dims) < n or any(d != 2 for d in state.dims[:n]):
        raise DimensionError(f"oracle on {n} bits needs {n} leading qubit subsystems, got dims {state.dims}")
    psi = state.amps.reshape(2**n, -1) * oracle.phases()[:, None]
    return StateVector(state.space, psi.ravel())


def xor_oracle_apply(state: StateVector, oracle: OracleSpec, target: int | None = None) -> StateVector:
    """Reversible oracle ``|X, y> -> |X, y ^ F(X)>`` with the register leading.

    ``target`` defaults to the subsystem right after the register.
    """
    n = oracle.n
    target = n if target is None else target
    if target != n or len(state.dims) <= n or any(d != 2 for d in state.dims[: n + 1]):
        raise DimensionError("xor oracle expects n register qubits followed by the target qubit")
    t = state.amps.reshape(2**n, 2, -1)
    flip = np.asarray(oracle.truth_table, dtype=bool)
    out = t.copy()
    out[flip] = t[flip][:, ::-1]
    return StateVector(state.space, out.ravel())


# --------------------------------------------------------------------------
# Hadamard layer
# --------------------------------------------------------------------------


def _hadamard_leading(state: StateVector, n: int) -> StateVector:
    psi = state.amps.reshape(2**n, -1)
    return StateVector(state.space, _kernels.fwht(psi).ravel())


def hadamard_transform(register: StateVector) -> StateVector:
    """``H`` on every qubit of an all-qubit register."""
    if any(d != 2 for d in register.dims):
        raise DimensionError(f"Hadamard transform needs qubit subsystems only, got dims {register.dims}")
    return _hadamard_leading(register, len(register.dims))


# --------------------------------------------------------------------------
# cavity preparation
# --------------------------------------------------------------------------

_PREP_ATOM = StateVector((2,), [-1j * _SQRT_HALF, _SQRT_HALF])  # (-i|e0> + |f0>)/sqrt2


def minus_state() -> StateVector:
    return StateVector((2,), [_SQRT_HALF, -_SQRT_HALF])


def prepare_minus_fock(atom_state: StateVector | None = None) -> StateVector:
    """Cavity state left behind by a resonant ``g tau = pi/2`` pulse.

    The auxiliary atom A0 (levels e=0, f=1) enters in ``atom_state``, by
    default ``(-i|e0> + |f0>)/sqrt2``, with the two-level cavity in vacuum.
    The atom must exit disentangled; the returned cavity factor carries the
    phase of the |f0> branch.
    """
    atom = _PREP_ATOM if atom_state is None else atom_state
    joint = tensor(atom, StateVector.basis((2,), (0,)))
    joint = jc_resonant(joint, pi / 2, atom=0, cavity=1)
    purity = reduced_purity(joint, 1)
    if abs(purity - 1.0) > TOL:
        raise NumericInvariantError(f"preparation atom left entangled with the cavity (purity {purity!r})")
    return factor_out(joint, 1)


@dataclass(frozen=True)
class CatPreparation:
    cavity: StateVector
    detected_level: str
    target_level: str
    postselect_probability: float
    fidelity_with_odd_cat: float
    truncation: FockTruncation

    @property
    def success(self) -> bool:
        return self.detected_level == self.target_level

    @property
    def status(self) -> str:
        return "ok" if self.success else "postselection failed"


def _cat_target(c_f: complex, c_g: complex) -> str:
    if abs(c_f - 1j * c_g) <= 1e-10:
        return "f"
    if abs(c_f + 1j * c_g) <= 1e-10:
        return "g"
    raise ValueError("Ramsey coefficients must satisfy c_f = i c_g (detect f) or c_f = -i c_g (detect g)")


_LEVEL_NAMES = {RamseyAtom.F: "f", RamseyAtom.G: "g"}


def _cat_pre_measurement(c_f, c_g, alpha, tail_epsilon):
    trunc = choose_truncation(alpha, tail_epsilon)
    atom = apply_on(ramsey_r1(c_f, c_g), StateVector.basis((2,), (RamseyAtom.G,)), 0)
    state = tensor(atom, coherent_state(CoherentSpec(-alpha, trunc)))
    state = apply_joint(u2_dispersive(pi, trunc.dim, include_e=False), state, (0, 1))
    state = apply_on(ramsey_r2(), state, 0)
    return state, trunc


def prepare_odd_cat(
    c_f: complex,
    c_g: complex,
    alpha: complex = DEFAULT_ALPHA,
    seed: int = 0,
    tail_epsilon: float = DEFAULT_TAIL_EPSILON,
) -> CatPreparation:
    """Herald an odd cat state in the cavity by detecting Ramsey atom B.

    Sequence: B starts in ``|g>``, passes R1 (giving ``c_f|f> + c_g|g>``),
    crosses the cavity (initially ``|-alpha>``) with ``U2`` at ``phi = pi``,
    passes R2 and is detected. ``c_f = i c_g`` targets detection in ``f``,
    ``c_f = -i c_g`` targets ``g``. On the other outcome the returned cavity
    state is the even cat and ``success`` is False; retry with a new seed.
    """
    target = _cat_target(complex(c_f), complex(c_g))
    state, trunc = _cat_pre_measurement(c_f, c_g, alpha, tail_epsilon)
    p_target = float(marginal_probabilities(state, 0)[RamseyAtom.levels[target]])
    outcome = measure_subsystem(state, 0, seed)
    cavity = factor_out(outcome.post_state, 1)
    odd = cat_state(CatState("-", alpha, trunc))
    return CatPreparation(
        cavity=cavity,
        detected_level=_LEVEL_NAMES[outcome.basis_label],
        target_level=target,
        postselect_probability=p_target,
        fidelity_with_odd_cat=fidelity_up_to_phase(cavity, odd),
        truncation=trunc,
    )


@dataclass(frozen=True)
class CatPrepStatistics:
    shots: int
    successes: int
    analytic_probability: float

    @property
    def empirical_rate(self) -> float:
        return self.successes / self.shots if self.shots else float("nan")


def cat_prep_trials(
    c_f: complex,
    c_g: complex,
    alpha: complex = DEFAULT_ALPHA,
    shots: int = 10_000,
    seed: int = 0,
    tail_epsilon: float = DEFAULT_TAIL_EPSILON,
) -> CatPrepStatistics:
    """Repeat the heralding measurement with per-shot seeds ``derive_seed(seed, k)``.

    Shot ``k`` sees exactly what ``prepare_odd_cat(..., seed=derive_seed(seed, k))``
    would, without rebuilding the pre-measurement state each time.
    """
    target = _cat_target(complex(c_f), complex(c_g))
    state, _ = _cat_pre_measurement(c_f, c_g, alpha, tail_epsilon)
    probs = marginal_probabilities(state, 0)
    want = RamseyAtom.levels[target]
    hits = sum(
        sample_index(probs, np.random.default_rng(derive_seed(seed, k)).random()) == want
        for k in range(shots)
    )
    return CatPrepStatistics(shots, hits, float(probs[want]))


# --------------------------------------------------------------------------
# execution modes
# --------------------------------------------------------------------------


class Mode(str, enum.Enum):
    IDEAL_GATE = "ideal_gate"
    TWO_LEVEL_FOCK = "two_level_fock"
    THREE_LEVEL_COHERENT = "three_level_coherent"


DEFAULT_MAX_N = {Mode.IDEAL_GATE: 10, Mode.TWO_LEVEL_FOCK: 10, Mode.THREE_LEVEL_COHERENT: 8}


@dataclass(frozen=True)
class ExecutionMode:
    kind: Mode
    alpha: complex | None = None
    tail_epsilon: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Mode(self.kind))
        coherent = self.kind is Mode.THREE_LEVEL_COHERENT
        if coherent and (self.alpha is None or self.tail_epsilon is None):
            raise ValueError("three_level_coherent mode needs alpha and tail_epsilon")
        if not coherent and (self.alpha is not None or self.tail_epsilon is not None):
            raise ValueError(f"{self.kind.value} mode takes no alpha / tail_epsilon")

    @classmethod
    def ideal(cls) -> ExecutionMode:
        return cls(Mode.IDEAL_GATE)

    @classmethod
    def two_level(cls) -> ExecutionMode:
        return cls(Mode.TWO_LEVEL_FOCK)

    @classmethod
    def coherent(cls, alpha: complex = DEFAULT_ALPHA, tail_epsilon: float = DEFAULT_TAIL_EPSILON) -> ExecutionMode:
        return cls(Mode.THREE_LEVEL_COHERENT, alpha, tail_epsilon)

    @property
    def truncation(self) -> FockTruncation | None:
        if self.kind is not Mode.THREE_LEVEL_COHERENT:
            return None
        return choose_truncation(self.alpha, self.tail_epsilon)


# readout label -> atomic level, per mode
OUTCOME_LEVELS = {
    Mode.IDEAL_GATE: ("0", "1"),
    Mode.TWO_LEVEL_FOCK: ("e", "f"),
    Mode.THREE_LEVEL_COHERENT: ("f", "g"),
}


@dataclass(frozen=True)
class Simulation:
    """Full state history of one noiseless run."""

    oracle: OracleSpec
    requested: ExecutionMode
    executed: ExecutionMode
    realizable: bool
    phi: float | None
    after_oracle: StateVector
    final: StateVector
    expected_cavity: StateVector

    @property
    def n(self) -> int:
        return self.oracle.n

    @property
    def cavity_index(self) -> int:
        return self.n

    def register_distribution(self) -> np.ndarray:
        """Probability of each n-bit readout ``X`` (flat array of length 2^n)."""
        probs = leading_probabilities(self.final, self.n)
        if self.executed.kind is Mode.THREE_LEVEL_COHERENT:
            probs = probs[_qubit_indices_in_qutrits(self.n)]
        return probs

    def e_level_population(self) -> float | None:
        if self.executed.kind is not Mode.THREE_LEVEL_COHERENT:
            return None
        return float(max(0.0, 1.0 - self.register_distribution().sum()))

    def register_state(self, which: str = "final") -> StateVector:
        """Register factor as an n-qubit state (three-level atoms projected on f/g)."""
        state = self.final if which == "final" else self.after_oracle
        reg = factor_leading(state, self.n)
        if self.executed.kind is Mode.THREE_LEVEL_COHERENT:
            reg = StateVector.normalized((2,) * self.n, reg.amps[_qubit_indices_in_qutrits(self.n)])
        return reg

    def cavity_purity(self) -> float:
        return reduced_purity(self.final, self.cavity_index)

    def cavity_fidelity(self) -> float:
        rho = reduced_density_matrix(self.final, self.cavity_index)
        chi = self.expected_cavity.amps
        val = float(np.real(np.vdot(chi, rho @ chi)))
        return float(np.sqrt(min(1.0, max(0.0, val))))


def _qubit_indices_in_qutrits(n: int) -> np.ndarray:
    """Flat base-3 indices of the 2^n register states with no atom in |e>."""
    x = np.arange(2**n)
    idx = np.zeros(2**n, dtype=np.int64)
    for k in range(n):
        bit = (x >> (n - 1 - k)) & 1
        idx += bit * 3 ** (n - 1 - k)
    return idx


def _initial_ideal(n: int) -> StateVector:
    reg = StateVector.basis((2,) * (n + 1), (0,) * n + (1,))
    return _hadamard_leading(reg, n + 1)


def _initial_two_level(n: int) -> StateVector:
    atom = StateVector((2,), [_SQRT_HALF, _SQRT_HALF])  # (|e> + |f>)/sqrt2
    return tensor_all([atom] * n + [prepare_minus_fock()])


def _initial_three_level(n: int, mode: ExecutionMode) -> StateVector:
    atom = StateVector((3,), [_SQRT_HALF, _SQRT_HALF, 0.0])  # (|f> + |g>)/sqrt2
    cavity = cat_state(CatState("-", mode.alpha, mode.truncation))
    return tensor_all([atom] * n + [cavity])


def simulate(oracle: OracleSpec, mode: ExecutionMode, max_n: int | None = None) -> Simulation:
    """Run the Deutsch-Jozsa pipeline and keep the intermediate states.

    Oracles the physical schedule cannot realize run in ``ideal_gate`` mode
    and are flagged ``realizable=False``.
    """
    n = oracle.n
    limit = DEFAULT_MAX_N[mode.kind] if max_n is None else max_n
    if n > limit:
        raise ValueError(f"n={n} exceeds the configured maximum {limit} for {mode.kind.value} mode")

    phi = None
    realizable = True
    executed = mode
    if mode.kind is not Mode.IDEAL_GATE:
        target = physical_phi_for(oracle)
        if isinstance(target, Unrealizable):
            realizable = False
            executed = ExecutionMode.ideal()
        else:
            phi = target

    kind = executed.kind
    if kind is Mode.IDEAL_GATE:
        state = xor_oracle_apply(_initial_ideal(n), oracle)
        expected = minus_state()
    elif kind is Mode.TWO_LEVEL_FOCK:
        state = _initial_two_level(n)
        u1 = u1_dispersive(phi, state.dims[n])
        for k in range(n):
            state = apply_joint(u1, state, (k, n))
        sign = (-1) ** n if phi == PHI_BALANCED else 1
        expected = StateVector((2,), [_SQRT_HALF, -sign * _SQRT_HALF])
    else:
        state = _initial_three_level(n, executed)
        u2 = u2_dispersive(phi, state.dims[n])
        for k in range(n):
            state = apply_joint(u2, state, (k, n))
        expected = cat_state(CatState("-", executed.alpha, executed.truncation))
    after_oracle = state

    if kind is Mode.THREE_LEVEL_COHERENT:
        h3 = embed_qubit_op(hadamard())
        for k in range(n):
            state = apply_on(h3, state, k)
    else:
        state = _hadamard_leading(state, n)

    return Simulation(oracle, mode, executed, realizable, phi, after_oracle, state, expected)


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RunReport:
    mode: str
    executed_mode: str
    oracle: dict
    oracle_cavity_realizable: bool
    phi: float | None
    outcome_levels: tuple[str, str]
    distribution: dict[str, float]
    p_all_zeros: float
    decision: str
    register_cavity_purity: float
    cavity_final_fidelity_vs_expected: float
    e_level_population: float | None
    alpha: float | list[float] | None
    n_max: int | None
    seed: int
    shots: int
    counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "executed_mode": self.executed_mode,
            "oracle": dict(self.oracle),
            "oracle_cavity_realizable": self.oracle_cavity_realizable,
            "phi": self.phi,
            "outcome_levels": {"0": self.outcome_levels[0], "1": self.outcome_levels[1]},
            "p_all_zeros": self.p_all_zeros,
            "decision": self.decision,
            "register_cavity_purity": self.register_cavity_purity,
            "cavity_final_fidelity_vs_expected": self.cavity_final_fidelity_vs_expected,
            "e_level_population": self.e_level_population,
            "alpha": self.alpha,
            "n_max": self.n_max,
            "seed": self.seed,
            "shots": self.shots,
            "distribution": dict(self.distribution),
            "counts": dict(self.counts),
        }


def sample_counts(probs: np.ndarray, n: int, shots: int, seed: int) -> dict[str, int]:
    """Register readouts for ``shots`` shots; shot ``k`` uses stream ``derive_seed(seed, k)``."""
    counts: dict[str, int] = {}
    for k in range(shots):
        x = sample_index(probs, np.random.default_rng(derive_seed(seed, k)).random())
        key = format(x, f"0{n}b")
        counts[key] = counts.get(key, 0) + 1
    return dict(sorted(counts.items()))


def _alpha_value(alpha):
    if alpha is None:
        return None
    alpha = complex(alpha)
    return alpha.real if alpha.imag == 0 else [alpha.real, alpha.imag]


def report_from_simulation(sim: Simulation, seed: int = 0, shots: int = 0) -> RunReport:
    n = sim.n
    probs = sim.register_distribution()
    total = float(probs.sum()) + (sim.e_level_population() or 0.0)
    if abs(total - 1.0) > TOL:
        raise NumericInvariantError(f"register distribution sums to {total!r}")
    dist = {format(x, f"0{n}b"): float(p) for x, p in enumerate(probs)}
    p0 = float(probs[0])
    trunc = sim.executed.truncation
    alpha = sim.executed.alpha
    return RunReport(
        mode=sim.requested.kind.value,
        executed_mode=sim.executed.kind.value,
        oracle=sim.oracle.summary(),
        oracle_cavity_realizable=sim.realizable,
        phi=sim.phi,
        outcome_levels=OUTCOME_LEVELS[sim.executed.kind],
        distribution=dist,
        p_all_zeros=p0,
        decision="constant" if p0 > DECISION_THRESHOLD else "balanced",
        register_cavity_purity=sim.cavity_purity(),
        cavity_final_fidelity_vs_expected=sim.cavity_fidelity(),
        e_level_population=sim.e_level_population(),
        alpha=_alpha_value(alpha),
        n_max=None if trunc is None else trunc.n_max,
        seed=int(seed),
        shots=int(shots),
        counts=sample_counts(probs, n, shots, seed) if shots else {},
    )


def run_deutsch_jozsa(
    oracle: OracleSpec,
    mode: ExecutionMode,
    seed: int = 0,
    shots: int = 0,
    max_n: int | None = None,
) -> RunReport:
    """One oracle call, then read whether the register is all zeros.

    The distribution is exact (computed from amplitudes); ``shots > 0`` adds
    sampled readout counts.
    """
    return report_from_simulation(simulate(oracle, mode, max_n), seed, shots)


def run_deutsch(oracle: OracleSpec, mode: ExecutionMode, seed: int = 0, shots: int = 0) -> RunReport:
    if oracle.n != 1:
        raise ValueError("the Deutsch run takes a one-bit oracle; use run_deutsch_jozsa for n > 1")
    return run_deutsch_jozsa(oracle, mode, seed, shots)
