"""Circuit synthesis, rewrite passes, simulation and training for
amplitude-encoded linear regression."""

from .circuit import (
    Circuit,
    CountReport,
    Gate,
    circuit_from_json,
    circuit_to_json,
    cnot,
    equivalent_up_to_phase,
    gate_counts,
    h,
    mcrz,
    new_circuit,
    rx,
    rz,
    unitary_of,
    x,
)
from .data import (
    DataTable,
    RegisterLayout,
    flatten_padded,
    ingest_csv,
    layout_for,
    split_rows,
    standardize,
    synthetic_linear_table,
)
from .errors import CapacityError, DegenerateProjectionError, EstimatorStarvedError
from .mitigation import ConfusionSet, calibrate_readout, mitigate_counts
from .passes import (
    PassReport,
    PhasePolynomial,
    extract_phase_polynomial,
    fold_phases,
    optimize_pipeline,
    push_hadamards,
    push_paulis,
    resynthesize,
)
from .simulator import (
    Counts,
    LossEstimate,
    NoiseModel,
    default_noise,
    expectation_mhat,
    loss_from_run,
    project,
    sample,
    shadow_estimate,
    simulate,
)
from .synthesis import (
    build_regression_circuit,
    build_state_prep,
    build_uc_naive,
    build_ud_naive,
    decompose_all_mcrz,
    decompose_mcrz,
    gray_sequence,
    naive_gate_count_formula,
    optimized_gate_count,
    synthesize_reference_real_state,
    synthesize_uniform_z,
    walsh_angles,
)
from .trainer import (
    AdamState,
    TrainConfig,
    TrainedModel,
    adam_step,
    fit_classical_least_squares,
    fit_quantum,
    gradient,
    loss_closed_form,
    nelder_mead_minimize,
    r2_score,
    weights_from_phis,
)

__version__ = "0.1.0"
