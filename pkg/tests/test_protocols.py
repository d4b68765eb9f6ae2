import itertools
import math

import numpy as np
import pytest

from cavity_dj.errors import DimensionError, OracleClassError
from cavity_dj.hilbert import StateVector, factor_out, fidelity_up_to_phase, reduced_purity, tensor
from cavity_dj.optics import CatState, cat_state, choose_truncation
from cavity_dj.protocols import (
    PHI_BALANCED,
    PHI_CONSTANT,
    ExecutionMode,
    Mode,
    OracleSpec,
    Unrealizable,
    bitwise_dot,
    cat_prep_trials,
    hadamard_transform,
    ideal_oracle_apply,
    physical_phi_for,
    prepare_minus_fock,
    prepare_odd_cat,
    run_deutsch,
    run_deutsch_jozsa,
    simulate,
    xor_oracle_apply,
)

S = 1 / math.sqrt(2)
MODES = [ExecutionMode.ideal(), ExecutionMode.two_level(), ExecutionMode.coherent()]
ONE_BIT = {"const0": "00", "const1": "11", "identity": "01", "negation": "10"}


def popcount_parity(v: int) -> int:
    p = 0
    while v:
        p ^= v & 1
        v >>= 1
    return p


def dot_by_chars(x: str, y: str) -> int:
    acc = 0
    for a, b in zip(x, y):
        acc ^= int(a) & int(b)
    return acc


# -- oracle spec --------------------------------------------------------------


def test_oracle_classification():
    assert OracleSpec.constant(3, 1).kind == "constant"
    assert OracleSpec.parity(3).kind == "balanced"
    assert OracleSpec.from_string(2, "0110").kind == "balanced"
    with pytest.raises(OracleClassError, match="oracle class violation"):
        OracleSpec.from_string(2, "0100")
    with pytest.raises(ValueError):
        OracleSpec.from_string(2, "011")


@pytest.mark.parametrize("n", range(1, 8))
def test_random_balanced_is_balanced_and_seeded(n):
    a = OracleSpec.random_balanced(n, seed=42)
    assert a.ones_count == 2 ** (n - 1)
    assert a == OracleSpec.random_balanced(n, seed=42)


# -- bitwise dot / Hadamard transform -----------------------------------------


def test_bitwise_dot_examples():
    assert bitwise_dot("000", "101") == 0
    assert bitwise_dot("11", "11") == 0
    assert bitwise_dot("110", "011") == 1
    with pytest.raises(ValueError):
        bitwise_dot("10", "1")


def test_bitwise_dot_exhaustive_n3():
    for x, y in itertools.product(range(8), repeat=2):
        xs, ys = format(x, "03b"), format(y, "03b")
        assert bitwise_dot(xs, ys) == dot_by_chars(xs, ys) == popcount_parity(x & y)


def test_hadamard_transform_examples():
    out = hadamard_transform(StateVector.basis((2, 2), (0, 0)))
    np.testing.assert_allclose(out.amps, [0.5] * 4, atol=1e-15)
    out = hadamard_transform(StateVector.basis((2,), (1,)))
    np.testing.assert_allclose(out.amps, [S, -S], atol=1e-15)
    with pytest.raises(DimensionError):
        hadamard_transform(StateVector.basis((2, 3), (0, 0)))


def hadamard_formula_matrix(n):
    """(-1)^(X.Y) / sqrt(2^n), double loop over X, Y."""
    N = 2**n
    m = np.empty((N, N))
    for x in range(N):
        for y in range(N):
            m[y, x] = (-1) ** dot_by_chars(format(x, f"0{n}b"), format(y, f"0{n}b"))
    return m / math.sqrt(N)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_hadamard_transform_vs_formula(n):
    m = hadamard_formula_matrix(n)
    for x in range(2**n):
        col = hadamard_transform(StateVector.basis((2,) * n, tuple(int(b) for b in format(x, f"0{n}b")))).amps
        assert np.max(np.abs(col - m[:, x])) <= 1e-12


# -- oracles applied to states ------------------------------------------------


def test_ideal_oracle_examples():
    plus = StateVector((2,), [S, S])
    assert np.array_equal(ideal_oracle_apply(plus, OracleSpec.constant(1, 0)).amps, plus.amps)
    out = ideal_oracle_apply(plus, OracleSpec.constant(1, 1))
    assert fidelity_up_to_phase(out, plus) == pytest.approx(1.0)
    np.testing.assert_allclose(out.amps, -plus.amps)
    out = ideal_oracle_apply(plus, OracleSpec.from_string(1, "01"))
    np.testing.assert_allclose(out.amps, [S, -S])
    with pytest.raises(DimensionError):
        ideal_oracle_apply(plus, OracleSpec.parity(2))


def test_xor_oracle_is_phase_kickback():
    minus = StateVector((2,), [S, -S])
    for name, table in ONE_BIT.items():
        oracle = OracleSpec.from_string(1, table)
        for x in (0, 1):
            state = tensor(StateVector.basis((2,), (x,)), minus)
            out = xor_oracle_apply(state, oracle)
            np.testing.assert_allclose(out.amps, (-1) ** oracle(x) * state.amps, err_msg=name)


# -- physical realizability -----------------------------------------------------


def test_physical_phi_examples():
    assert physical_phi_for(OracleSpec.from_string(1, "01")) == PHI_BALANCED
    assert physical_phi_for(OracleSpec.from_string(1, "10")) == PHI_BALANCED
    assert physical_phi_for(OracleSpec.constant(3, 0)) == PHI_CONSTANT
    assert physical_phi_for(OracleSpec.constant(3, 1)) == PHI_CONSTANT
    assert isinstance(physical_phi_for(OracleSpec.from_function(2, lambda x: x >> 1)), Unrealizable)


def _schedule_phases(n, phi):
    """Register phase pattern of n two-level atoms (|e>+|f>)/sqrt2 after U1(phi),
    obtained from the single-atom analytic rule applied bit by bit."""
    per_atom = {0: -1.0, 1: 1.0} if phi == PHI_BALANCED else {0: 1.0, 1: 1.0}
    return np.array([np.prod([per_atom[int(b)] for b in format(x, f"0{n}b")]) for x in range(2**n)])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_realizability_by_brute_force(n):
    """Every constant/balanced table of size n: realizable iff the physical
    schedule's phase pattern equals the oracle's up to global sign."""
    N = 2**n
    for table in itertools.product((0, 1), repeat=N):
        if sum(table) not in (0, N // 2, N):
            continue
        oracle = OracleSpec(n, table)
        signs = oracle.phases()
        matches = [
            phi for phi in (PHI_BALANCED, PHI_CONSTANT)
            if abs(abs(np.dot(signs, _schedule_phases(n, phi))) - N) < 1e-12
        ]
        got = physical_phi_for(oracle)
        if matches:
            assert got == matches[0]
        else:
            assert isinstance(got, Unrealizable)
    # for n = 2 the only realizable balanced tables are parity and its complement
    if n == 2:
        real = [t for t in ("0011", "0101", "0110", "1001", "1010", "1100")
                if not isinstance(physical_phi_for(OracleSpec.from_string(2, t)), Unrealizable)]
        assert real == ["0110", "1001"]


# -- cavity preparation --------------------------------------------------------


def test_prepare_minus_fock_nominal():
    cav = prepare_minus_fock()
    np.testing.assert_allclose(cav.amps, [S, -S], atol=1e-15)
    assert fidelity_up_to_phase(cav, StateVector((2,), [S, -S])) >= 1 - 1e-12


def test_prepare_minus_fock_branches():
    cav = prepare_minus_fock(StateVector.basis((2,), (1,)))  # |f0>
    np.testing.assert_allclose(cav.amps, [1, 0])
    cav = prepare_minus_fock(StateVector((2,), [-1j, 0]))  # -i|e0>
    np.testing.assert_allclose(cav.amps, [0, -1], atol=1e-15)
    assert fidelity_up_to_phase(cav, StateVector.basis((2,), (1,))) == pytest.approx(1.0)


def independent_cat_prep(c_f, c_g, alpha, dim):
    """Plain-numpy rerun of the heralding sequence (no package operators)."""
    n = np.arange(dim)
    coh = np.array([math.exp(-abs(alpha) ** 2 / 2) * (-alpha) ** k / math.sqrt(math.factorial(k)) for k in n])
    coh = coh / np.linalg.norm(coh)
    atom = np.array([c_f, c_g])  # R1|g>
    psi = np.kron(atom, coh)
    psi[:dim] *= np.exp(1j * math.pi * n)  # U2 on the f branch
    r2 = np.array([[1, -1j], [-1j, 1]]) / math.sqrt(2)
    psi = np.kron(r2, np.eye(dim)) @ psi
    return psi.reshape(2, dim)


@pytest.mark.parametrize("target,c_f", [("f", 1j * S), ("g", -1j * S)])
def test_prepare_odd_cat(target, c_f):
    c_g = S
    alpha = 2.0
    t = choose_truncation(alpha)
    block = independent_cat_prep(c_f, c_g, alpha, t.dim)
    row = 0 if target == "f" else 1
    p_expected = float(np.sum(np.abs(block[row]) ** 2))
    assert p_expected == pytest.approx((1 - math.exp(-2 * alpha**2)) / 2, abs=1e-10)

    seed = next(s for s in range(100) if prepare_odd_cat(c_f, c_g, alpha, seed=s).success)
    prep = prepare_odd_cat(c_f, c_g, alpha, seed=seed)
    assert prep.detected_level == target
    assert prep.postselect_probability == pytest.approx(p_expected, abs=1e-12)
    assert prep.postselect_probability == pytest.approx(0.5, abs=0.01)
    odd = cat_state(CatState("-", alpha, t))
    bound = 1 - 100 * max(1e-12, math.exp(-2 * alpha**2))
    assert prep.fidelity_with_odd_cat >= max(0.999, bound)
    conditional = StateVector.normalized((t.dim,), block[row])
    assert fidelity_up_to_phase(conditional, prep.cavity) >= 1 - 1e-12
    assert fidelity_up_to_phase(conditional, odd) >= 1 - 1e-12


def test_prepare_odd_cat_failure_is_reported():
    c_f, c_g = 1j * S, S
    seed = next(s for s in range(100) if not prepare_odd_cat(c_f, c_g, 2.0, seed=s).success)
    prep = prepare_odd_cat(c_f, c_g, 2.0, seed=seed)
    assert prep.status == "postselection failed"
    even = cat_state(CatState("+", 2.0, prep.truncation))
    assert fidelity_up_to_phase(prep.cavity, even) >= 1 - 1e-12


def test_prepare_odd_cat_rejects_untargeted_coefficients():
    with pytest.raises(ValueError):
        prepare_odd_cat(0.6, 0.8)


def test_cat_prep_trials_consistent_with_single_runs():
    from cavity_dj.hilbert import derive_seed

    c_f, c_g = 1j * S, S
    stats = cat_prep_trials(c_f, c_g, 2.0, shots=50, seed=11)
    singles = sum(prepare_odd_cat(c_f, c_g, 2.0, seed=derive_seed(11, k)).success for k in range(50))
    assert stats.successes == singles


# -- runs ----------------------------------------------------------------------


@pytest.mark.parametrize("mode", MODES, ids=lambda m: m.kind.value)
@pytest.mark.parametrize("name", list(ONE_BIT))
def test_run_deutsch(mode, name):
    oracle = OracleSpec.from_string(1, ONE_BIT[name])
    rep = run_deutsch(oracle, mode)
    assert rep.decision == oracle.kind
    p = rep.distribution["0" if oracle.kind == "constant" else "1"]
    assert p == pytest.approx(1.0, abs=1e-10)
    assert rep.oracle_cavity_realizable
    assert rep.executed_mode == mode.kind.value


def test_deutsch_final_atom_levels():
    for table, level in (("00", "e"), ("11", "e"), ("01", "f"), ("10", "f")):
        sim = simulate(OracleSpec.from_string(1, table), ExecutionMode.two_level())
        atom = sim.register_state()
        idx = {"e": 0, "f": 1}[level]
        assert abs(atom.amps[idx]) == pytest.approx(1.0, abs=1e-12)
    for table, level in (("00", "f"), ("01", "g")):
        sim = simulate(OracleSpec.from_string(1, table), ExecutionMode.coherent())
        assert abs(sim.final.tensor_view()[{"f": 0, "g": 1}[level]]).max() > 0.5
        assert sim.register_distribution()[{"f": 0, "g": 1}[level]] == pytest.approx(1.0, abs=1e-10)


def test_n1_members_of_a_class_differ_by_global_phase():
    for mode in MODES:
        for pair in (("00", "11"), ("01", "10")):
            a, b = (simulate(OracleSpec.from_string(1, t), mode).register_state() for t in pair)
            assert fidelity_up_to_phase(a, b) == pytest.approx(1.0, abs=1e-12)


def test_run_deutsch_requires_one_bit():
    with pytest.raises(ValueError):
        run_deutsch(OracleSpec.parity(2), ExecutionMode.ideal())


def test_dj_examples():
    for mode in MODES:
        assert run_deutsch_jozsa(OracleSpec.constant(3, 0), mode).p_all_zeros == pytest.approx(1.0, abs=1e-10)
    sim = simulate(OracleSpec.parity(3), ExecutionMode.two_level())
    assert run_deutsch_jozsa(OracleSpec.parity(3), ExecutionMode.two_level()).p_all_zeros <= 1e-10
    atom = StateVector((2,), [-S, S])  # (-|e> + |f>)/sqrt2
    expected_reg = tensor(tensor(atom, atom), atom)
    assert fidelity_up_to_phase(sim.register_state("after_oracle"), expected_reg) >= 1 - 1e-12


def test_dj_random_balanced_n4_brute_force():
    oracle = OracleSpec.random_balanced(4, seed=2024)
    # amplitude of |0...0> = (1/2^n) sum_X (-1)^F(X)
    amp0 = sum((-1) ** oracle(x) for x in range(16)) / 16
    assert amp0 == 0
    rep = run_deutsch_jozsa(oracle, ExecutionMode.ideal())
    assert rep.p_all_zeros <= 1e-10
    assert rep.decision == "balanced"


def test_unrealizable_falls_back_to_ideal():
    oracle = OracleSpec.from_string(2, "0011")
    for mode in (ExecutionMode.two_level(), ExecutionMode.coherent()):
        rep = run_deutsch_jozsa(oracle, mode)
        assert not rep.oracle_cavity_realizable
        assert rep.executed_mode == "ideal_gate"
        assert rep.mode == mode.kind.value
        assert rep.decision == "balanced"


@pytest.mark.parametrize("n", range(1, 5))
def test_decision_exhaustive_ideal(n):
    N = 2**n
    for table in itertools.product((0, 1), repeat=N):
        if sum(table) not in (0, N // 2, N):
            continue
        oracle = OracleSpec(n, table)
        rep = run_deutsch_jozsa(oracle, ExecutionMode.ideal())
        assert rep.decision == oracle.kind
        assert min(rep.p_all_zeros, abs(1 - rep.p_all_zeros)) <= 1e-10


@pytest.mark.parametrize("n", range(1, 7))
def test_mode_equivalence(n):
    alpha = 2.0
    for oracle in (OracleSpec.constant(n, 0), OracleSpec.constant(n, 1), OracleSpec.parity(n)):
        ideal = simulate(oracle, ExecutionMode.ideal()).register_state()
        two = simulate(oracle, ExecutionMode.two_level()).register_state()
        coh = simulate(oracle, ExecutionMode.coherent(alpha)).register_state()
        assert fidelity_up_to_phase(ideal, two) >= 1 - 1e-10
        assert fidelity_up_to_phase(ideal, coh) >= 1 - 10 * math.exp(-2 * alpha**2)


@pytest.mark.parametrize("n", range(1, 7))
def test_cavity_sign_alternation(n):
    sim = simulate(OracleSpec.parity(n), ExecutionMode.two_level())
    cav = factor_out(sim.after_oracle, n)
    expected = StateVector((2,), [S, -((-1) ** n) * S])
    assert fidelity_up_to_phase(cav, expected) >= 1 - 1e-10
    sim = simulate(OracleSpec.constant(n, 0), ExecutionMode.two_level())
    assert fidelity_up_to_phase(factor_out(sim.after_oracle, n), StateVector((2,), [S, -S])) >= 1 - 1e-10


def test_coherent_mode_keeps_e_empty_and_cavity_odd():
    for oracle in (OracleSpec.parity(3), OracleSpec.constant(3, 1)):
        sim = simulate(oracle, ExecutionMode.coherent())
        assert sim.e_level_population() <= 1e-12
        assert reduced_purity(sim.final, 3) >= 1 - 10 * math.exp(-8)
        assert sim.cavity_fidelity() >= 1 - 1e-10


def test_size_limits():
    with pytest.raises(ValueError, match="maximum"):
        run_deutsch_jozsa(OracleSpec.parity(9), ExecutionMode.coherent())
    with pytest.raises(ValueError, match="maximum"):
        run_deutsch_jozsa(OracleSpec.parity(11), ExecutionMode.ideal())
    run_deutsch_jozsa(OracleSpec.parity(3), ExecutionMode.coherent(), max_n=3)


def test_execution_mode_parameters():
    with pytest.raises(ValueError):
        ExecutionMode(Mode.IDEAL_GATE, alpha=2.0)
    with pytest.raises(ValueError):
        ExecutionMode(Mode.THREE_LEVEL_COHERENT)
    assert ExecutionMode.coherent().truncation.n_max == 25


def test_shots_are_deterministic_and_consistent():
    oracle = OracleSpec.random_balanced(3, seed=5)
    a = run_deutsch_jozsa(oracle, ExecutionMode.ideal(), seed=99, shots=200)
    b = run_deutsch_jozsa(oracle, ExecutionMode.ideal(), seed=99, shots=200)
    assert a.counts == b.counts
    assert sum(a.counts.values()) == 200
    assert "000" not in a.counts


def test_report_distribution_sums_to_one():
    for mode in MODES:
        rep = run_deutsch_jozsa(OracleSpec.parity(4), mode)
        total = sum(rep.distribution.values()) + (rep.e_level_population or 0.0)
        assert total == pytest.approx(1.0, abs=1e-10)
