"""Learn unitary operators from input/output states and factor them into circuits."""

from ._unisynth import (
    UnisynthError,
    factor,
    fidelity_error,
    frobenius_gradient,
    frobenius_objective,
    haar_random_unitary,
    learn,
    named_operator,
    named_target,
    nearest_unitary,
    normalize_qasm,
    pipeline,
    procrustes_solve,
    process_fidelity,
    qasm_matrix,
    random_state_batch,
    read_matrix,
    unitarization_objective,
    write_matrix,
)

__all__ = [
    "UnisynthError",
    "factor",
    "fidelity_error",
    "frobenius_gradient",
    "frobenius_objective",
    "haar_random_unitary",
    "learn",
    "named_operator",
    "named_target",
    "nearest_unitary",
    "normalize_qasm",
    "pipeline",
    "procrustes_solve",
    "process_fidelity",
    "qasm_matrix",
    "random_state_batch",
    "read_matrix",
    "unitarization_objective",
    "write_matrix",
]
