"""capsim: classical simulation of quantum communication at desk scale.

A library and CLI that simulates sending n qubits through a noiseless
channel followed by a two-outcome pure-projector measurement, using only
classical communication and shared randomness. Implements the exact qubit
hidden-variable model, its bounded-error cap-sampling generalization with
analytic error/cost formulas, a bit-exact finite-communication realization
via rejection sampling and Golomb coding, strong-simulation and
dimensional-reduction baselines, and a reproducible Monte Carlo harness.
"""

__version__ = "0.1.0"

from .cap_protocol import (
    CapParams,
    CostReport,
    ErrorReport,
    Outcome,
    asym_cost_for_error,
    cost_report,
    error_report,
    exact_quasi_prob,
    respond,
    response_prob,
    sample_cap,
    theta_for_error,
)
from .errors import (
    BoundViolationError,
    BudgetExceededError,
    DecodeError,
    DimensionMismatchError,
    InvalidParameterError,
)
from .fc_channel import (
    SharedRandomness,
    Transcript,
    alice_encode,
    bob_decode,
    fc_cost_experiment,
    golomb_decode,
    golomb_encode,
)
from .hilbert import (
    RngStream,
    StateVector,
    UnitaryMatrix,
    fidelity,
    haar_state,
    haar_unitary,
    inner,
    orthogonal_complement_sample,
)
from .ks_qubit import QubitOutcome, respond_ks, sample_ks_ontic

__all__ = [
    "__version__",
    "BoundViolationError",
    "BudgetExceededError",
    "CapParams",
    "CostReport",
    "DecodeError",
    "DimensionMismatchError",
    "ErrorReport",
    "InvalidParameterError",
    "Outcome",
    "QubitOutcome",
    "RngStream",
    "SharedRandomness",
    "StateVector",
    "Transcript",
    "UnitaryMatrix",
    "alice_encode",
    "asym_cost_for_error",
    "bob_decode",
    "cost_report",
    "error_report",
    "exact_quasi_prob",
    "fc_cost_experiment",
    "fidelity",
    "golomb_decode",
    "golomb_encode",
    "haar_state",
    "haar_unitary",
    "inner",
    "orthogonal_complement_sample",
    "respond",
    "respond_ks",
    "response_prob",
    "sample_cap",
    "sample_ks_ontic",
    "theta_for_error",
]
