"""State-vector simulation of cavity-QED Deutsch and Deutsch-Jozsa protocols."""

from ._kernels import BACKEND
from .dynamics import (
    InteractionParams,
    hadamard,
    jc_resonant,
    phi_for_tau,
    ramsey_r1,
    ramsey_r2,
    tau_for_phi,
    u1_dispersive,
    u2_dispersive,
)
from .feasibility import FeasibilityReport, HardwareParams, feasibility_report, max_feasible_atoms
from .hilbert import (
    CompositeSpace,
    MeasurementOutcome,
    Operator,
    StateVector,
    apply_joint,
    apply_on,
    fidelity_up_to_phase,
    measure_subsystem,
    reduced_purity,
    tensor,
)
from .optics import (
    CatState,
    CoherentSpec,
    FockTruncation,
    cat_state,
    choose_truncation,
    coherent_state,
    number_phase_op,
)
from .protocols import (
    ExecutionMode,
    Mode,
    OracleSpec,
    RunReport,
    Unrealizable,
    bitwise_dot,
    hadamard_transform,
    ideal_oracle_apply,
    physical_phi_for,
    prepare_minus_fock,
    prepare_odd_cat,
    run_deutsch,
    run_deutsch_jozsa,
)

__version__ = "0.1.0"
